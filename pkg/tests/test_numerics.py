import math

import numpy as np
import pytest
import scipy.special

from selfadj1d.errors import ConfigError, ExtrapolationError, IntegrationOverflowError
from selfadj1d.model import (
    Domain1D,
    Free,
    HalfLineRobin,
    InverseSquare,
    KineticWeight,
    PotentialSpec,
    PowerLaw,
    Problem,
)
from selfadj1d.numerics import (
    Grid,
    SolutionSamples,
    bracket_roots,
    digamma,
    f_tilde,
    find_roots,
    integrate_stationary,
    polish_root,
    richardson_limit,
    wronskian,
    wronskian_samples,
)

EULER_GAMMA = 0.57721566490153286060651209008240243104215933593992


def series_digamma(x, terms=2_000_000):
    """Independent oracle: psi(x) = -gamma + sum_k [1/(k+1) - 1/(k+x)].

    Plain series with the analytically summed tail correction; good to ~1e-12
    for moderate x.
    """
    k = np.arange(terms, dtype=float)
    s = np.sum(1.0 / (k + 1.0) - 1.0 / (k + x))
    # tail: sum_{k>=N} (x-1)/((k+1)(k+x)) ~ (x-1)/N to first order
    tail = (x - 1.0) / terms
    return -EULER_GAMMA + s + tail


def make_problem(family, weight=None):
    pot = PotentialSpec(family, weight) if weight else PotentialSpec(family)
    return Problem(Domain1D.half_line(), pot, HalfLineRobin.from_length(1.0))


class TestDigamma:
    def test_psi_one_is_minus_euler_gamma(self):
        assert digamma(1.0) == pytest.approx(-EULER_GAMMA, abs=1e-13)
        assert digamma(1.0) == pytest.approx(series_digamma(1.0), abs=5e-7)

    def test_recurrence_shift(self):
        # psi(2) = psi(1) + 1 = 1 - gamma
        assert digamma(2.0) == pytest.approx(1.0 - EULER_GAMMA, abs=1e-13)

    def test_half_argument_duplication(self):
        # duplication formula: psi(2x) = 0.5*(psi(x) + psi(x + 1/2)) + ln 2
        # at x = 1/2: psi(1/2) = 2 psi(1) - psi(1) ... directly: -gamma - 2 ln 2
        assert digamma(0.5) == pytest.approx(-EULER_GAMMA - 2.0 * math.log(2.0), abs=1e-13)

    def test_recurrence_lattice(self):
        for x in np.arange(0.1, 10.01, 0.1):
            assert digamma(x + 1.0) - digamma(x) == pytest.approx(1.0 / x, abs=1e-12)

    def test_against_scipy_across_range(self):
        xs = np.concatenate([np.linspace(-49.7, -0.3, 120), np.linspace(0.05, 50, 120)])
        for x in xs:
            if abs(x - round(x)) < 0.05 and x < 0.5:
                continue
            assert digamma(float(x)) == pytest.approx(
                float(scipy.special.digamma(x)), abs=1e-11, rel=1e-11
            )

    def test_pole_raises(self):
        for x in (0.0, -1.0, -7.0):
            with pytest.raises(ConfigError):
                digamma(x)


class TestFTilde:
    def test_pole_structure(self):
        with pytest.raises(ConfigError):
            f_tilde(0.0)
        with pytest.raises(ConfigError):
            f_tilde(-1.0)
        # divergence flanking the pole at xi = -1
        assert f_tilde(-1.0 + 1e-9) < -1e6
        assert f_tilde(-1.0 - 1e-9) > 1e6

    def test_first_root_by_bisection_oracle(self):
        # independent coarse bisection, no reuse of the packaged root finder
        lo, hi = -0.95, -0.05
        flo = f_tilde(lo)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if f_tilde(mid) * flo > 0:
                lo = mid
            else:
                hi = mid
        root = 0.5 * (lo + hi)
        assert root == pytest.approx(-0.4869855578, abs=1e-8)
        # consistency with the printed first level shift c1 ~ 0.5130
        assert 1.0 + root == pytest.approx(0.5130, abs=5e-4)

    def test_second_root(self):
        roots = find_roots(f_tilde, (-1.999, -1.001), 64)
        assert len(roots) == 1
        assert roots[0] == pytest.approx(-1.5120856622, abs=1e-8)
        assert 2.0 + roots[0] == pytest.approx(0.4879, abs=5e-4)

    def test_exactly_one_bracket_below_zero(self):
        brackets = bracket_roots(f_tilde, (-0.99, -0.01), 64)
        assert len(brackets) == 1


class TestBracketRoots:
    def test_sqrt_two(self):
        brackets = bracket_roots(lambda x: x * x - 2.0, (0.0, 2.0), 16)
        assert len(brackets) == 1
        root = polish_root(lambda x: x * x - 2.0, *brackets[0])
        assert root == pytest.approx(math.sqrt(2.0), rel=1e-12)

    def test_no_sign_change_gives_empty(self):
        assert bracket_roots(lambda x: x * x + 1.0, (-3.0, 3.0), 32) == []

    def test_every_bracket_has_sign_change(self):
        rng = np.random.default_rng(7)
        f = lambda x: math.sin(3.1 * x) + 0.2 * x
        for _ in range(20):
            a = rng.uniform(-10, 0)
            b = a + rng.uniform(1, 12)
            for lo, hi in bracket_roots(f, (a, b), 40):
                assert f(lo) == 0 or f(lo) * f(hi) < 0


class TestGrid:
    def test_minimum_nodes(self):
        with pytest.raises(ConfigError):
            Grid.uniform(0, 1, 8)

    def test_monotone_required(self):
        with pytest.raises(ConfigError):
            Grid(np.concatenate([np.linspace(0, 1, 20), np.linspace(0.5, 2, 20)]))

    def test_log_grid_clusters_toward_endpoint(self):
        g = Grid.log_toward_endpoint(1e-6, 1.0, 256, endpoint="left")
        nodes = g.nodes
        last_decade = nodes[nodes <= 1e-5]
        assert last_decade.size >= nodes.size // 2
        assert nodes[0] == pytest.approx(1e-6)
        assert nodes[-1] == pytest.approx(1.0)

    def test_log_grid_right_endpoint(self):
        g = Grid.log_toward_endpoint(1e-4, 1.0, 128, endpoint="right")
        nodes = g.nodes
        near_right = nodes[nodes >= 1.0 + 1e-4 - 1e-3]
        assert near_right.size >= nodes.size // 2


class TestIntegrateStationary:
    def test_free_sine(self):
        problem = make_problem(Free())
        grid = Grid.uniform(0.0, 10.0, 2001)
        sol = integrate_stationary(problem, 1.0, "left", (0.0, 1.0), grid)
        assert np.max(np.abs(sol.psi - np.sin(grid.nodes))) < 1e-8
        assert np.max(np.abs(sol.p_dpsi - np.cos(grid.nodes))) < 1e-7

    def test_inverse_square_power_solution(self):
        # x^{5/4} solves the c = 5/16 problem at E = 0
        problem = make_problem(InverseSquare(5.0 / 16.0))
        grid = Grid.log_toward_endpoint(1e-3, 1.0, 400, endpoint="left")
        x0 = grid.nodes[0]
        init = (x0**1.25, 1.25 * x0**0.25)
        sol = integrate_stationary(problem, 0.0, "left", init, grid)
        exact = grid.nodes**1.25
        assert np.max(np.abs(sol.psi - exact) / exact) < 1e-6

    def test_wronskian_constant_along_grid(self):
        problem = make_problem(Free())
        grid = Grid.uniform(0.0, 10.0, 4001)
        a = integrate_stationary(problem, 1.0, "left", (0.0, 1.0), grid)
        b = integrate_stationary(problem, 1.0, "left", (1.0, 0.0), grid)
        w = wronskian_samples(a, b)
        mid = w[w.size // 2]
        assert np.max(np.abs(w - mid) / abs(mid)) < 1e-8

    def test_wronskian_constant_rough_potential(self):
        problem = make_problem(InverseSquare(0.3))
        grid = Grid.log_toward_endpoint(1e-4, 5.0, 600, endpoint="left")
        x0 = grid.nodes[0]
        a = integrate_stationary(problem, 2.5, "left", (1.0, 0.3), grid)
        b = integrate_stationary(problem, 2.5, "left", (0.0, 1.0), grid)
        w = wronskian_samples(a, b)
        mid = w[w.size // 2]
        assert np.max(np.abs(w - mid) / abs(mid)) < 1e-8

    def test_right_to_left_direction(self):
        problem = make_problem(Free())
        grid = Grid.uniform(0.0, 3.0, 301)
        sol = integrate_stationary(problem, -1.0, "right", (math.exp(-3.0), -math.exp(-3.0)), grid)
        assert np.max(np.abs(sol.psi - np.exp(-grid.nodes))) < 1e-9

    def test_overflow_reports_coordinate(self):
        problem = make_problem(Free())
        grid = Grid.uniform(0.0, 2000.0, 4001)
        with pytest.raises(IntegrationOverflowError) as err:
            integrate_stationary(problem, -1.0, "left", (1.0, 1.0), grid)
        assert err.value.x is not None

    def test_nonfinite_energy_rejected(self):
        problem = make_problem(Free())
        grid = Grid.uniform(0.0, 1.0, 64)
        with pytest.raises(ConfigError):
            integrate_stationary(problem, math.nan, "left", (1.0, 0.0), grid)

    def test_zero_init_rejected(self):
        problem = make_problem(Free())
        grid = Grid.uniform(0.0, 1.0, 64)
        with pytest.raises(ConfigError):
            integrate_stationary(problem, 1.0, "left", (0.0, 0.0), grid)


class TestWronskian:
    def test_sin_cos(self):
        grid = Grid.uniform(0.0, 6.0, 601)
        x = grid.nodes
        a = SolutionSamples(grid, np.sin(x), np.cos(x))
        b = SolutionSamples(grid, np.cos(x), -np.sin(x))
        for at in (0.3, 2.2, 5.9):
            assert wronskian(a, b, at) == pytest.approx(-1.0, abs=1e-14)

    def test_paper_pair_inverse_square(self):
        grid = Grid.log_toward_endpoint(1e-4, 1.0, 200, endpoint="left")
        x = grid.nodes
        a = SolutionSamples(grid, x**1.25, 1.25 * x**0.25)
        b = SolutionSamples(grid, -(2.0 / 3.0) * x**-0.25, (1.0 / 6.0) * x**-1.25)
        assert wronskian(a, b, 0.01) == pytest.approx(1.0, rel=1e-12)

    def test_quasi_derivative_weight_pair(self):
        # p = x^4: a = 1/x, b = -1/x^2, p a' = -x^2, p b' = 2x
        grid = Grid.log_toward_endpoint(1e-3, 1.0, 200, endpoint="left")
        x = grid.nodes
        a = SolutionSamples(grid, 1.0 / x, -(x**2.0), p=x**4)
        b = SolutionSamples(grid, -1.0 / x**2, 2.0 * x, p=x**4)
        assert wronskian(a, b, 0.5) == pytest.approx(1.0, rel=1e-12)

    def test_outside_grid_rejected(self):
        grid = Grid.uniform(0.0, 1.0, 64)
        a = SolutionSamples(grid, np.ones(64), np.zeros(64))
        with pytest.raises(ConfigError):
            wronskian(a, a, 2.0)


class TestRichardsonLimit:
    def test_power_law_sequence(self):
        xs = 1e-2 * 0.5 ** np.arange(10)
        ws = 3.0 + 2.0 * xs**1.5
        limit, err = richardson_limit(xs, ws)
        assert limit == pytest.approx(3.0, abs=1e-9)

    def test_known_basis(self):
        xs = np.geomspace(1e-5, 1e-3, 8)
        ws = (1.5 - 2j) + 0.3 * xs * np.log(xs) + 0.7 * xs
        limit, err = richardson_limit(xs, ws, basis=[lambda x: x * np.log(x), lambda x: x])
        assert limit == pytest.approx(1.5 - 2j, abs=1e-10)

    def test_divergent_sequence_raises(self):
        xs = 1e-2 * 0.5 ** np.arange(8)
        ws = 1.0 / xs
        with pytest.raises(ExtrapolationError):
            richardson_limit(xs, ws)
