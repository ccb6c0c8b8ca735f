import math

import numpy as np
import pytest

from selfadj1d.errors import ConfigError, LimitPointEndpointError
from selfadj1d.model import (
    Coulomb,
    Domain1D,
    Free,
    HalfLineRobin,
    InverseSquare,
    KineticWeight,
    LineU2,
    PotentialSpec,
    PowerLaw,
    Problem,
)
from selfadj1d.numerics import Grid, SolutionSamples, integrate_stationary, wronskian_samples
from selfadj1d.refmodes import limit_numbers, reference_modes, second_solution


def half_line(family, weight=None, L=1.0):
    pot = PotentialSpec(family, weight) if weight else PotentialSpec(family)
    return Problem(Domain1D.half_line(), pot, HalfLineRobin.from_length(L))


def head_arrays(pair, x):
    v1, q1 = pair.phi1(x)
    v2, q2 = pair.phi2(x)
    return v1, q1, v2, q2


class TestReferenceModeConstruction:
    def test_inverse_square_pair_matches_closed_form(self):
        pair = reference_modes(half_line(InverseSquare(5.0 / 16.0)), "origin")
        x = np.geomspace(1e-4, 1e-2, 16)
        v1, q1, v2, q2 = head_arrays(pair, x)
        assert np.allclose(v1, x**1.25, rtol=1e-12)
        assert np.allclose(v2, -(2.0 / 3.0) * x**-0.25, rtol=1e-12)
        # normalization p W = 1
        w = v1 * q2 - q1 * v2
        assert np.allclose(w, 1.0, atol=1e-12)

    def test_coulomb_pair_leading_terms(self):
        g = -2.0
        pair = reference_modes(half_line(Coulomb(g)), "origin")
        x = np.geomspace(1e-6, 1e-4, 12)
        v1, q1, v2, q2 = head_arrays(pair, x)
        assert np.allclose(v1, -x, rtol=1e-4)
        assert np.allclose(v2, 1.0 + g * x * np.log(abs(g) * x), rtol=1e-6, atol=1e-8)
        w = v1 * q2 - q1 * v2
        assert np.allclose(w, 1.0, atol=1e-8)

    def test_regular_pair(self):
        pair = reference_modes(half_line(Free()), "origin")
        x = np.linspace(1e-3, 0.3, 20)
        v1, q1, v2, q2 = head_arrays(pair, x)
        assert np.allclose(v1, -x, rtol=1e-14)
        assert np.allclose(v2, 1.0, rtol=1e-14)
        assert np.allclose(v1 * q2 - q1 * v2, 1.0, atol=1e-14)

    def test_weighted_pair_is_limit_point_and_refused(self):
        prob = half_line(PowerLaw(-2.0, 2.0), weight=KineticWeight(1.0, 4.0))
        with pytest.raises(LimitPointEndpointError):
            reference_modes(prob, "origin")

    def test_limit_point_inverse_square_refused(self):
        with pytest.raises(LimitPointEndpointError):
            reference_modes(half_line(InverseSquare(21.0 / 16.0)), "origin")

    def test_tails_keep_unit_wronskian(self):
        for family in (InverseSquare(5.0 / 16.0), Coulomb(-2.0), Free()):
            pair = reference_modes(half_line(family), "origin")
            w = wronskian_samples(pair.tail1, pair.tail2)
            assert np.max(np.abs(w - 1.0)) < 1e-8, f"{family} tail Wronskian drifts"

    def test_minus_side_orientation(self):
        prob = Problem(
            Domain1D.line(),
            PotentialSpec(InverseSquare(5.0 / 16.0)),
            LineU2(np.eye(2, dtype=complex)),
        )
        pair = reference_modes(prob, "origin_minus")
        x = -np.geomspace(1e-4, 1e-2, 8)
        v1, q1, v2, q2 = head_arrays(pair, x)
        # x-space Wronskian normalization holds on the minus side too
        assert np.allclose(v1 * q2 - q1 * v2, 1.0, atol=1e-12)

    def test_e0_enters_tails_only(self):
        pair0 = reference_modes(half_line(InverseSquare(5.0 / 16.0)), "origin", E0=0.0)
        pair1 = reference_modes(half_line(InverseSquare(5.0 / 16.0)), "origin", E0=1.0)
        x = np.geomspace(1e-5, 1e-3, 8)
        assert np.allclose(pair0.phi1(x)[0], pair1.phi1(x)[0], rtol=1e-14)
        w = wronskian_samples(pair1.tail1, pair1.tail2)
        assert np.max(np.abs(w - 1.0)) < 1e-7


class TestSecondSolution:
    def test_constant_gives_linear(self):
        grid = Grid.uniform(0.5, 3.0, 501)
        phi1 = SolutionSamples(grid, np.ones(grid.n), np.zeros(grid.n), np.ones(grid.n))
        phi2 = second_solution(phi1, 1.0)
        assert np.allclose(phi2.psi.real, grid.nodes - 1.0, atol=1e-12)
        w = wronskian_samples(phi1, phi2)
        assert np.allclose(w, 1.0, atol=1e-12)

    def test_sine_on_interval(self):
        grid = Grid.uniform(0.4, math.pi - 0.4, 2001)
        x = grid.nodes
        phi1 = SolutionSamples(grid, np.sin(x), np.cos(x), np.ones(grid.n))
        x0 = x[grid.nearest_index(1.2)]  # the integral starts at the snapped node
        phi2 = second_solution(phi1, x0)
        w = wronskian_samples(phi1, phi2)
        assert np.max(np.abs(w - 1.0)) < 1e-12
        # quadrature oracle: phi2 = sin(x) * (cot(x0) - cot(x))
        oracle = np.sin(x) * (1.0 / math.tan(x0) - 1.0 / np.tan(x))
        assert np.max(np.abs(phi2.psi.real - oracle)) < 1e-6

    def test_power_law_pair_up_to_admixture(self):
        # phi1 = x^(5/4): second solution is -(2/3) x^(-1/4) + const * x^(5/4)
        grid = Grid.log_toward_endpoint(1e-3, 1.0, 800, endpoint="left")
        x = grid.nodes
        phi1 = SolutionSamples(grid, x**1.25, 1.25 * x**0.25, np.ones(grid.n))
        phi2 = second_solution(phi1, 0.5)
        w = wronskian_samples(phi1, phi2)
        assert np.max(np.abs(w - 1.0)) < 1e-12
        # remove the admissible phi1 admixture, compare shapes
        target = -(2.0 / 3.0) * x**-0.25
        coeff = np.polyfit(x**1.25, (phi2.psi.real - target), 1)[0]
        resid = phi2.psi.real - target - coeff * x**1.25
        assert np.max(np.abs(resid)) < 1e-5

    def test_zero_in_range_rejected(self):
        grid = Grid.uniform(-1.0, 1.0, 101)
        phi1 = SolutionSamples(grid, grid.nodes, np.ones(grid.n), np.ones(grid.n))
        with pytest.raises(ConfigError):
            second_solution(phi1, 0.5)

    def test_satisfies_same_ode(self):
        # independent check: second solution of the c=5/16 operator solves it
        prob = half_line(InverseSquare(5.0 / 16.0))
        grid = Grid.log_toward_endpoint(1e-3, 2.0, 6000, endpoint="left")
        x = grid.nodes
        phi1 = SolutionSamples(grid, x**1.25, 1.25 * x**0.25, np.ones(grid.n))
        phi2 = second_solution(phi1, 1.0)
        direct = integrate_stationary(
            prob, 0.0, "left", (complex(phi2.psi[0]), complex(phi2.p_dpsi[0])), grid
        )
        assert np.max(np.abs(direct.psi - phi2.psi)) < 1e-7


class TestLimitNumbers:
    def setup_method(self):
        self.problem = half_line(InverseSquare(5.0 / 16.0))
        self.pair = reference_modes(self.problem, "origin")
        self.grid = Grid.log_toward_endpoint(1e-6, 1.0, 600, endpoint="left")

    def exact_mode_samples(self, c1, c2):
        x = self.grid.nodes
        v1, q1 = self.pair.phi1(x)
        v2, q2 = self.pair.phi2(x)
        return SolutionSamples(self.grid, c1 * v1 + c2 * v2, c1 * q1 + c2 * q2)

    def test_pure_modes(self):
        ln = limit_numbers(self.exact_mode_samples(1.0, 0.0), self.pair)
        assert ln.c1 == pytest.approx(1.0, abs=1e-10)
        assert abs(ln.c2) < 1e-10
        ln = limit_numbers(self.exact_mode_samples(0.0, 1.0), self.pair)
        assert abs(ln.c1) < 1e-10
        assert ln.c2 == pytest.approx(1.0, abs=1e-10)

    def test_complex_combination_with_remainder(self):
        x = self.grid.nodes
        v1, q1 = self.pair.phi1(x)
        v2, q2 = self.pair.phi2(x)
        # faster-decaying remainder: x^(s_minus + 2)
        rem = x ** (-0.25 + 2.0)
        drem = (1.75) * x ** (0.75)
        psi = SolutionSamples(
            self.grid, 2.0 * v1 + 3j * v2 + 0.5 * rem, 2.0 * q1 + 3j * q2 + 0.5 * drem
        )
        ln = limit_numbers(psi, self.pair)
        assert ln.c1 == pytest.approx(2.0, abs=1e-6)
        assert ln.c2 == pytest.approx(3j, abs=1e-6)

    def test_linearity(self):
        rng = np.random.default_rng(11)
        for _ in range(8):
            a = complex(*rng.normal(size=2))
            b = complex(*rng.normal(size=2))
            la = limit_numbers(self.exact_mode_samples(a, 1.0 + 0j), self.pair)
            lb = limit_numbers(self.exact_mode_samples(0.5j, b), self.pair)
            alpha, beta = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
            combo = self.exact_mode_samples(alpha * a + beta * 0.5j, alpha * (1 + 0j) + beta * b)
            lc = limit_numbers(combo, self.pair)
            assert lc.c1 == pytest.approx(alpha * la.c1 + beta * lb.c1, abs=1e-8)
            assert lc.c2 == pytest.approx(alpha * la.c2 + beta * lb.c2, abs=1e-8)

    def test_energy_solution_extraction(self):
        # integrate a genuine E != 0 solution seeded as phi1 near the origin,
        # extract and compare against E0-built and E0=1-built modes
        prob = self.problem
        x0 = self.grid.nodes[0]
        v1, q1 = self.pair.phi1(np.array([x0]))
        sol = integrate_stationary(prob, 1.0, "left", (complex(v1[0]), complex(q1[0])), self.grid)
        ln0 = limit_numbers(sol, self.pair)
        pair1 = reference_modes(prob, "origin", E0=1.0)
        ln1 = limit_numbers(sol, pair1)
        assert ln0.c1 == pytest.approx(1.0, abs=1e-7)
        assert abs(ln0.c2) < 1e-7
        assert ln1.c1 == pytest.approx(ln0.c1, abs=1e-5)
        assert ln1.c2 == pytest.approx(ln0.c2, abs=1e-5)

    def test_wronskian_identity_of_adjoint_pairs(self):
        # lim W[psi*, chi] = c1(psi)* c2(chi) - c2(psi)* c1(chi)
        rng = np.random.default_rng(3)
        for _ in range(5):
            a1, a2 = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
            b1, b2 = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
            psi = self.exact_mode_samples(a1, a2)
            chi = self.exact_mode_samples(b1, b2)
            conj = SolutionSamples(self.grid, psi.psi.conj(), psi.p_dpsi.conj())
            w = wronskian_samples(conj, chi)
            w_limit = w[0]  # exact-mode samples make it constant
            expected = np.conj(a1) * b2 - np.conj(a2) * b1
            assert w_limit == pytest.approx(expected, abs=1e-6)

    def test_coulomb_log_mode_extraction(self):
        prob = half_line(Coulomb(-2.0))
        pair = reference_modes(prob, "origin")
        grid = Grid.log_toward_endpoint(1e-7, 0.5, 700, endpoint="left")
        x0 = grid.nodes[0]
        v1, q1 = pair.phi1(np.array([x0]))
        v2, q2 = pair.phi2(np.array([x0]))
        sol = integrate_stationary(
            prob, -0.25, "left",
            (complex(v1[0] + 0.5 * v2[0]), complex(q1[0] + 0.5 * q2[0])), grid,
        )
        ln = limit_numbers(sol, pair)
        assert ln.c1 == pytest.approx(1.0, abs=2e-5)
        assert ln.c2 == pytest.approx(0.5, abs=2e-5)
