"""Bound-state computation.

The generic path shoots from both ends: from the singular endpoint with the
unique initial ray satisfying the Robin condition on limit numbers,
(c1, c2) = (1, L) (or (0, 1) for the Neumann-type L = infinity), and from a
far-out point with a WKB-seeded decaying tail.  Eigenvalues are the zeros of
the matching Wronskian in E.  Closed-form and digamma-equation backends
cover the free half line and the attractive Coulomb problem; they double as
cross-checks for the shooting path.

Internally E = -kappa^2 and, for Coulomb levels, xi = g/(2 kappa) < 0 so
that the bound-state condition reads g*F(xi) = -1/L with F the digamma
combination from :func:`selfadj1d.numerics.f_tilde`; L = 0 collapses onto
the poles xi = -n, recovering E_n = -(g^2/4)/n^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, solve_ivp

from .classify import REGULAR, classify_endpoint
from .errors import ConfigError, NumericalError
from .model import (
    HALF_LINE,
    Coulomb,
    Free,
    HalfLineRobin,
    Problem,
)
from .numerics import (
    SINGULAR_START,
    Grid,
    SolutionSamples,
    bracket_roots,
    f_tilde,
    integrate_stationary,
    polish_root,
)
from .refmodes import reference_modes

BACKEND_SHOOTING = "shooting"
BACKEND_CLOSED_FORM = "closed_form"
BACKEND_DIGAMMA = "digamma"

_EV_RTOL = 1e-12
_NODE_FLOOR = 1e-8


@dataclass(frozen=True)
class BoundState:
    E: float
    nodes: int
    psi: SolutionSamples
    backend: str


# ---------------------------------------------------------------------------
# shooting machinery
# ---------------------------------------------------------------------------

def _robin_length(problem: Problem) -> float:
    if not isinstance(problem.bc, HalfLineRobin):
        raise ConfigError("bound-state shooting needs a half-line Robin problem")
    return problem.bc.L


def _initial_ray(modes, L: float, x0: float):
    v1, q1 = modes.phi1(np.array([x0]))
    v2, q2 = modes.phi2(np.array([x0]))
    if math.isinf(L):
        return float(v2[0].real), float(q2[0].real)
    s = 1.0 / max(1.0, abs(L))
    return (
        float((v1[0] + L * v2[0]).real) * s,
        float((q1[0] + L * q2[0]).real) * s,
    )


def _turning_radius(problem: Problem, E: float) -> float:
    fam = problem.potential.family
    if isinstance(fam, Coulomb) and fam.g < 0 and E < 0:
        return abs(fam.g) / abs(E)
    return 0.0


def _far_radius(problem: Problem, E: float) -> float:
    kappa = math.sqrt(-E)
    return max(30.0, 10.0 / kappa, 1.2 * _turning_radius(problem, E) + 15.0 / kappa)


def _endpoint_shoot(problem: Problem, E: float, a: float, b: float, init):
    """(psi, p*psi') at x = b integrating from x = a."""

    weight = problem.potential.weight

    def rhs(t, y):
        return [y[1] / weight(t), (problem.v(t) - E) * y[0]]

    sol = solve_ivp(
        rhs,
        (a, b),
        np.asarray(init, dtype=float),
        method="DOP853",
        rtol=1e-11,
        atol=1e-14 * max(1.0, abs(init[0]), abs(init[1])),
    )
    if not sol.success:
        raise NumericalError(f"shooting integration failed: {sol.message}")
    return float(sol.y[0, -1]), float(sol.y[1, -1])


def _wall_coordinate(problem: Problem) -> float:
    """Shooting starts exactly at a regular origin; a diverging potential
    pushes the start to the asymptotic-head seed point."""
    if classify_endpoint(problem, "origin").verdict == REGULAR:
        return 0.0
    return SINGULAR_START


def _mismatch(problem: Problem, E: float, L: float, modes, x_match: float, x0: float) -> float:
    vl, ql = _endpoint_shoot(problem, E, x0, x_match, _initial_ray(modes, L, x0))
    kappa = math.sqrt(-E)
    x_max = _far_radius(problem, E)
    # WKB tail with the local momentum; decays into the match point
    slope = -math.sqrt(max(problem.v(x_max) - E, 0.25 * kappa**2))
    vr, qr = _endpoint_shoot(problem, E, x_max, x_match, (1.0, slope))
    w = vl * qr - ql * vr
    scale = abs(vl * qr) + abs(ql * vr) + 1e-300
    return w / scale


def _scan_variable(problem: Problem, E_range):
    """(to_E, from_E, probe density per unit) in a family-aware variable."""
    fam = problem.potential.family
    e_lo, e_hi = E_range
    if isinstance(fam, Coulomb) and fam.g < 0:
        g = abs(fam.g)

        def to_e(nu):
            return -(g * g) / (4.0 * nu * nu)

        def from_e(e):
            return g / (2.0 * math.sqrt(-e))

        return to_e, from_e, 8
    return (lambda k: -k * k), (lambda e: math.sqrt(-e)), 16


def _assemble_eigenfunction(
    problem: Problem, E: float, L: float, modes, x0: float
) -> SolutionSamples:
    """Dense, normalized eigenfunction samples on a log+linear union grid."""
    x_match = min(1.0, 0.2 * _far_radius(problem, E))
    x_max = _far_radius(problem, E)
    if x0 > 0:
        # uniform-in-log sampling keeps quadrature accurate across all decades
        left_grid = Grid(np.geomspace(x0, x_match, 600), "log")
    else:
        left_grid = Grid.uniform(0.0, x_match, 500)
    right_grid = Grid.uniform(x_match, x_max, 2500)

    left = integrate_stationary(
        problem, E, "left", _initial_ray(modes, L, left_grid.nodes[0]), left_grid
    )
    kappa = math.sqrt(-E)
    slope = -math.sqrt(max(problem.v(x_max) - E, 0.25 * kappa**2))
    right = integrate_stationary(problem, E, "right", (1.0, slope), right_grid)

    # scale the tail onto the interior branch at the matching point
    vl, ql = left.psi[-1], left.p_dpsi[-1]
    vr, qr = right.psi[0], right.p_dpsi[0]
    scale = vl / vr if abs(vr) > abs(qr) else ql / qr
    nodes = np.concatenate([left_grid.nodes, right_grid.nodes[1:]])
    psi = np.concatenate([left.psi, scale * right.psi[1:]])
    p_dpsi = np.concatenate([left.p_dpsi, scale * right.p_dpsi[1:]])
    p = np.concatenate([left.p, right.p[1:]]) if left.p is not None else None

    density = np.abs(psi) ** 2
    norm2 = cumulative_simpson(density, x=nodes, initial=0.0)[-1]
    psi = psi / math.sqrt(norm2)
    p_dpsi = p_dpsi / math.sqrt(norm2)
    return SolutionSamples(Grid(nodes, "log"), psi, p_dpsi, p)


def _count_nodes(psi: SolutionSamples) -> int:
    v = psi.psi.real
    big = np.abs(v) > _NODE_FLOOR * np.abs(v).max()
    sign = np.sign(v[big])
    return int(np.sum(sign[1:] * sign[:-1] < 0))


def bound_states_shooting(
    problem: Problem,
    E_range: tuple = (-100.0, -1e-4),
    max_states: int | None = None,
) -> list:
    """All bound states with E in `E_range`, sorted by energy.

    Probes are laid out in a family-aware spectral variable (effective
    quantum number for attractive Coulomb, kappa otherwise) with at least 8
    probes per unit so that half-integer level shifts cannot slip between
    consecutive probes.
    """
    if problem.domain.kind != HALF_LINE:
        raise ConfigError("shooting solver operates on half-line problems")
    e_lo, e_hi = E_range
    if not (e_lo < e_hi < 0):
        raise ConfigError("E_range must satisfy E_lo < E_hi < 0 (below the essential spectrum)")
    L = _robin_length(problem)
    modes = reference_modes(problem, "origin", E0=0.0, extend=False)
    x0 = _wall_coordinate(problem)

    to_e, from_e, density = _scan_variable(problem, E_range)
    s_lo, s_hi = sorted((from_e(e_lo), from_e(e_hi)))

    def f(s):
        e = to_e(s)
        return _mismatch(problem, e, L, modes, min(1.0, 0.2 * _far_radius(problem, e)), x0)

    def solve_once(n_probes):
        brackets = bracket_roots(f, (s_lo, s_hi), n_probes)
        roots = [polish_root(f, lo, hi) for lo, hi in brackets]
        states = []
        for s in roots:
            E = to_e(s)
            psi = _assemble_eigenfunction(problem, E, L, modes, x0)
            states.append(BoundState(E, _count_nodes(psi), psi, BACKEND_SHOOTING))
        states.sort(key=lambda b: b.E)
        return states

    n_probes = max(33, int(math.ceil((s_hi - s_lo) * density)) + 1)
    states = solve_once(n_probes)
    node_list = [b.nodes for b in states]
    if node_list != sorted(set(node_list)) or (
        node_list and node_list != list(range(node_list[0], node_list[0] + len(node_list)))
    ):
        # a level may have slipped between probes: one retry, twice as dense
        states = solve_once(2 * n_probes)
    if max_states is not None:
        states = states[:max_states]
    return states


# ---------------------------------------------------------------------------
# closed-form and transcendental backends
# ---------------------------------------------------------------------------

def free_bound_state(problem: Problem) -> list:
    """The free half-line Robin wall binds exactly one state when L is a
    positive finite length: E = -1/L^2, psi = sqrt(2/L) e^(-x/L)."""
    L = _robin_length(problem)
    if not (np.isfinite(L) and L > 0):
        return []
    E = -1.0 / L**2
    grid = Grid.uniform(0.0, max(30.0, 12.0 * L), 4000)
    x = grid.nodes
    amp = math.sqrt(2.0 / L)
    psi = amp * np.exp(-x / L)
    return [
        BoundState(E, 0, SolutionSamples(grid, psi, -psi / L, np.ones_like(x)), BACKEND_CLOSED_FORM)
    ]


def coulomb_levels(g: float, L: float, n_levels: int) -> list:
    """Energies solving g*F(xi) = -1/L for xi < 0, deepest first.

    L = 0 returns the pole sequence xi = -n analytically (the textbook
    E_n = -(g^2/4)/n^2 levels); any other L interlaces that sequence, one
    root per unit interval.
    """
    if g >= 0:
        raise ConfigError("coulomb_levels needs an attractive coupling g < 0")
    if n_levels < 1:
        raise ConfigError("n_levels must be >= 1")
    if L == 0.0:
        xis = [-float(n) for n in range(1, n_levels + 1)]
        return [-(g * g) / (4.0 * xi * xi) for xi in xis]

    if math.isinf(L):
        def eq(xi):
            return f_tilde(xi)
    else:
        def eq(xi):
            return g * f_tilde(xi) + 1.0 / L

    energies = []
    eps = 1e-9
    for n in range(1, n_levels + 1):
        lo, hi = -n + eps, -(n - 1) - eps
        brackets = bracket_roots(eq, (lo, hi), 64)
        if len(brackets) != 1:
            raise NumericalError(
                f"expected one root of the level condition in ({-n}, {-(n-1)}), "
                f"found {len(brackets)}"
            )
        xi = polish_root(eq, *brackets[0])
        energies.append(-(g * g) / (4.0 * xi * xi))
    return energies


def coulomb_bound_states(problem: Problem, n_levels: int) -> list:
    """Digamma-equation backend with eigenfunction samples per level."""
    fam = problem.potential.family
    if not isinstance(fam, Coulomb) or fam.g >= 0:
        raise ConfigError("digamma backend requires an attractive Coulomb family")
    L = _robin_length(problem)
    modes = reference_modes(problem, "origin", E0=0.0, extend=False)
    states = []
    for E in coulomb_levels(fam.g, L, n_levels):
        psi = _assemble_eigenfunction(problem, E, L, modes, SINGULAR_START)
        states.append(BoundState(E, _count_nodes(psi), psi, BACKEND_DIGAMMA))
    return states


def bound_states(problem: Problem, E_range=(-100.0, -1e-4), max_states=None) -> list:
    """Backend dispatcher: closed form for the free wall, the digamma
    equation for attractive Coulomb, shooting otherwise."""
    fam = problem.potential.family
    if isinstance(fam, Free) and problem.potential.weight.is_identity:
        states = free_bound_state(problem)
        return states[:max_states] if max_states else states
    if (
        isinstance(fam, Coulomb)
        and fam.g < 0
        and problem.potential.weight.is_identity
        and max_states is not None
    ):
        return coulomb_bound_states(problem, max_states)
    return bound_states_shooting(problem, E_range, max_states)


# ---------------------------------------------------------------------------
# point interaction on the free line
# ---------------------------------------------------------------------------

def point_interaction_bound_count(U: np.ndarray) -> int:
    """Number of bound states of the free line with connection matrix U.

    A bound state at E = -kappa^2 exists per eigenphase theta of U with
    kappa = tan(theta/2) > 0, i.e. theta in (0, pi); for a separated
    (diagonal) U this is exactly the sign rule on L_pm = cot(theta_pm/2):
    one state per positive finite length.
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (2, 2) or np.abs(U @ U.conj().T - np.eye(2)).max() > 1e-12:
        raise ConfigError("U must be 2x2 unitary")
    if abs(U[0, 1]) + abs(U[1, 0]) < 1e-13:
        thetas = np.mod(np.angle(np.diag(U)), 2.0 * math.pi)
    else:
        thetas = np.mod(np.angle(np.linalg.eigvals(U)), 2.0 * math.pi)
    count = 0
    for theta in thetas:
        if 1e-12 < theta < math.pi - 1e-12:
            count += 1
    return count


def point_interaction_bound_energies(U: np.ndarray) -> list:
    """Energies -tan(theta/2)^2 of the bound states counted above."""
    U = np.asarray(U, dtype=complex)
    thetas = np.mod(np.angle(np.linalg.eigvals(U)), 2.0 * math.pi)
    return sorted(
        -math.tan(t / 2.0) ** 2 for t in thetas if 1e-12 < t < math.pi - 1e-12
    )
