"""Shared numerical kernels.

Stationary-equation integration (Numerov on uniform grids with identity
weight, embedded adaptive Runge-Kutta on the quasi-derivative system
otherwise), the digamma function and the Coulomb spectral function built on
it, bracketing root finders, and limit extraction by sequence acceleration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import ConfigError, ExtrapolationError, IntegrationOverflowError, NumericalError
from .model import Problem

MIN_NODES = 32
OVERFLOW_LIMIT = 1e250
SINGULAR_START = 1e-6  # integration never starts at a singular endpoint itself


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Strictly increasing coordinate nodes with a spacing policy tag."""

    nodes: np.ndarray
    spacing: str = "uniform"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.size < MIN_NODES:
            raise ConfigError(f"grids need at least {MIN_NODES} nodes, got {nodes.size}")
        if not np.all(np.diff(nodes) > 0):
            raise ConfigError("grid nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @staticmethod
    def uniform(a: float, b: float, n: int) -> "Grid":
        return Grid(np.linspace(a, b, n), "uniform")

    @staticmethod
    def log_toward_endpoint(
        a: float, b: float, n: int, endpoint: str = "left", ratio: float = 2.0
    ) -> "Grid":
        """Nodes clustered geometrically toward one endpoint.

        Node counts grow by `ratio` per decade toward the marked endpoint, so
        with ratio >= 2 at least half of all nodes sit in the decade nearest
        to it.
        """
        if a <= 0 or b <= a:
            raise ConfigError("log grid needs 0 < a < b (distances from the endpoint)")
        if ratio < 2.0:
            raise ConfigError("ratio must be >= 2 to concentrate half the nodes")
        n_dec = max(1, int(math.ceil(math.log10(b / a))))
        counts = []
        remaining = n
        for j in range(n_dec):  # nearest decade first
            if j == n_dec - 1:
                counts.append(max(remaining, 2))
            else:
                take = max(int(math.ceil(remaining * (1.0 - 1.0 / ratio))), 2)
                counts.append(take)
                remaining = max(remaining - take, 2)
        edges = [min(b, a * 10.0**j) for j in range(n_dec + 1)]
        pieces = [
            np.geomspace(edges[j], edges[j + 1], counts[j] + 1)[:-1] for j in range(n_dec)
        ]
        dist = np.unique(np.concatenate(pieces + [np.array([b])]))
        if endpoint == "left":
            return Grid(dist, "log")
        if endpoint == "right":
            return Grid(np.sort(b + a - dist), "log")
        raise ConfigError(f"endpoint must be 'left' or 'right', got {endpoint!r}")

    @property
    def n(self) -> int:
        return self.nodes.size

    def nearest_index(self, x: float) -> int:
        nodes = self.nodes
        if not nodes[0] <= x <= nodes[-1]:
            raise ConfigError(f"coordinate {x} outside grid [{nodes[0]}, {nodes[-1]}]")
        return int(np.argmin(np.abs(nodes - x)))


@dataclass(frozen=True)
class SolutionSamples:
    """psi and the quasi-derivative p(x)*psi' sampled on a grid."""

    grid: Grid
    psi: np.ndarray
    p_dpsi: np.ndarray
    p: np.ndarray | None = None  # kinetic weight at the nodes

    def __post_init__(self):
        for name in ("psi", "p_dpsi"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.size != self.grid.n:
                raise ConfigError(f"{name} length {arr.size} != grid length {self.grid.n}")
            object.__setattr__(self, name, arr)
        if self.p is not None:
            object.__setattr__(self, "p", np.asarray(self.p, dtype=float))

    def scaled(self, factor: complex) -> "SolutionSamples":
        return SolutionSamples(self.grid, self.psi * factor, self.p_dpsi * factor, self.p)


# ---------------------------------------------------------------------------
# stationary integration
# ---------------------------------------------------------------------------

def _numerov(x, f, y0, d0):
    """Numerov sweep for y'' = f(x) y on a uniform ascending grid.

    Returns (y, dy); the derivative is reconstructed to O(h^4) from the
    three-point formula corrected with the known second derivative.
    """
    h = x[1] - x[0]
    n = x.size
    y = np.empty(n, dtype=complex)
    y[0] = y0
    fp0 = (f[1] - f[0]) / h
    # O(h^5)-accurate Taylor start using y'' = f y
    y[1] = (
        y0 * (1 + h**2 * f[0] / 2 + h**4 * f[0] ** 2 / 24 + h**3 * fp0 / 6)
        + h * d0 * (1 + h**2 * f[0] / 6)
    )
    w = 1.0 - h**2 / 12.0 * f
    for i in range(1, n - 1):
        y[i + 1] = ((12.0 - 10.0 * w[i]) * y[i] - w[i - 1] * y[i - 1]) / w[i + 1]
        if abs(y[i + 1].real) > OVERFLOW_LIMIT or abs(y[i + 1].imag) > OVERFLOW_LIMIT:
            raise IntegrationOverflowError(
                f"Numerov overflow at x = {x[i + 1]:.6g}", x=x[i + 1]
            )
    dy = np.empty(n, dtype=complex)
    dy[0] = d0
    dy[1:-1] = ((y[2:] - y[:-2]) - h**2 / 6.0 * (f[2:] * y[2:] - f[:-2] * y[:-2])) / (2 * h)
    # last node: advance y' = y'(-2) + integral of f*y over the final step
    # (Adams-Moulton on the quadratic through the last three f*y values)
    g = f * y
    dy[-1] = dy[-2] + h / 12.0 * (-g[-3] + 8.0 * g[-2] + 5.0 * g[-1])
    return y, dy


def integrate_stationary(
    problem: Problem,
    E: float,
    from_endpoint: str,
    init: tuple,
    grid: Grid,
    method: str = "auto",
) -> SolutionSamples:
    """Integrate -(p psi')' + V psi = E psi across `grid`.

    `init` is (psi, p*psi') at the first node ("left") or last node
    ("right").  Numerov is used on uniform grids with identity weight,
    otherwise an adaptive 8(5,3) Runge-Kutta on the first-order system
    (psi, p psi').
    """
    if not np.isfinite(E):
        raise ConfigError(f"energy must be finite, got {E}")
    if init[0] == 0 and init[1] == 0:
        raise ConfigError("initial value and quasi-derivative cannot both vanish")
    if from_endpoint not in ("left", "right"):
        raise ConfigError("from_endpoint must be 'left' or 'right'")

    x = grid.nodes
    weight = problem.potential.weight
    use_numerov = method == "numerov" or (
        method == "auto" and weight.is_identity and grid.spacing == "uniform"
    )

    if use_numerov:
        f = problem.v(x) - E
        if from_endpoint == "left":
            y, dy = _numerov(x, f, init[0], init[1])
        else:
            # mirror u = -x so the sweep still runs over an ascending grid
            y, dy = _numerov(-x[::-1], f[::-1], init[0], -init[1])
            y, dy = y[::-1], -dy[::-1]
        p = np.ones_like(x)
        return SolutionSamples(grid, y, dy, p)

    def rhs(t, y):
        p = weight(t)
        return [y[1] / p, (problem.v(t) - E) * y[0]]

    def blow_up(t, y):
        return max(abs(y[0]), abs(y[1])) - OVERFLOW_LIMIT

    blow_up.terminal = True

    complex_init = np.iscomplexobj(np.asarray(init))
    y0 = np.array(init, dtype=complex if complex_init else float)
    if from_endpoint == "left":
        span = (x[0], x[-1])
        t_eval = x
    else:
        span = (x[-1], x[0])
        t_eval = x[::-1]
    # cap the step so the 7th-order dense output stays below the Wronskian
    # constancy tolerance in oscillatory regions
    max_step = min(abs(span[1] - span[0]) / 8.0, 0.25 / math.sqrt(abs(E) + 1.0))
    sol = solve_ivp(
        rhs,
        span,
        y0,
        method="DOP853",
        t_eval=t_eval,
        rtol=1e-13,
        atol=1e-14 * max(1.0, abs(init[0]), abs(init[1])),
        max_step=max_step,
        events=blow_up,
        dense_output=False,
    )
    if sol.status == 1:  # terminated by the blow-up event
        raise IntegrationOverflowError(
            f"integration overflow near x = {sol.t[-1]:.6g}", x=float(sol.t[-1])
        )
    if not sol.success:
        raise NumericalError(f"ODE integration failed: {sol.message}")
    psi, p_dpsi = sol.y[0], sol.y[1]
    if from_endpoint == "right":
        psi, p_dpsi = psi[::-1], p_dpsi[::-1]
    return SolutionSamples(grid, psi, p_dpsi, np.asarray(weight(x), dtype=float))


def wronskian(a: SolutionSamples, b: SolutionSamples, at: float) -> complex:
    """Quasi-derivative Wronskian a*(p b') - (p a')*b at the node nearest `at`."""
    if a.grid.n != b.grid.n or not np.allclose(a.grid.nodes, b.grid.nodes):
        raise ConfigError("Wronskian requires a shared grid")
    i = a.grid.nearest_index(at)
    return complex(a.psi[i] * b.p_dpsi[i] - a.p_dpsi[i] * b.psi[i])


def wronskian_samples(a: SolutionSamples, b: SolutionSamples) -> np.ndarray:
    return a.psi * b.p_dpsi - a.p_dpsi * b.psi


# ---------------------------------------------------------------------------
# digamma and the Coulomb spectral function
# ---------------------------------------------------------------------------

_ASYMPTOTIC_SHIFT = 12.0
# Bernoulli-number coefficients of the large-argument expansion
_BERNOULLI_TERMS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(x: float) -> float:
    """Digamma function via upward recurrence into the asymptotic series.

    Accurate to ~1e-13 absolute away from the poles at 0, -1, -2, ...
    """
    if x <= 0 and x == math.floor(x):
        raise ConfigError(f"digamma pole at x = {x}")
    acc = 0.0
    while x < _ASYMPTOTIC_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for coeff in _BERNOULLI_TERMS:
        series += coeff * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - series


def f_tilde(xi: float) -> float:
    """Psi(1+xi) - ln|xi| - 1/(2 xi) - Psi(1) - Psi(2).

    Its roots against -1/(gL) locate the Coulomb bound states; simple poles
    sit at xi = -1, -2, ... where Psi(1+xi) diverges.
    """
    if xi == 0.0:
        raise ConfigError("f_tilde is singular at xi = 0")
    return digamma(1.0 + xi) - math.log(abs(xi)) - 0.5 / xi - digamma(1.0) - digamma(2.0)


# ---------------------------------------------------------------------------
# root bracketing and polishing
# ---------------------------------------------------------------------------

def bracket_roots(f, interval: tuple, n_probes: int) -> list:
    """Scan `interval` with `n_probes` points, return sign-change brackets.

    Probes where f is non-finite are dropped (brackets never straddle them),
    so declared poles split the scan automatically.
    """
    a, b = interval
    xs = np.linspace(a, b, int(n_probes))
    vals = []
    for x in xs:
        try:
            v = f(x)
        except (ConfigError, NumericalError, ZeroDivisionError, ValueError):
            v = math.nan
        vals.append(v)
    brackets = []
    for x0, x1, f0, f1 in zip(xs[:-1], xs[1:], vals[:-1], vals[1:]):
        if not (math.isfinite(f0) and math.isfinite(f1)):
            continue
        if f0 == 0.0:
            brackets.append((x0, x0))
        elif f0 * f1 < 0:
            brackets.append((x0, x1))
    return brackets


def polish_root(f, lo: float, hi: float) -> float:
    """Refine a bracketed root to ~1e-12 relative (Brent bisection/secant)."""
    if lo == hi:
        return lo
    return brentq(f, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=200)


def find_roots(f, interval: tuple, n_probes: int) -> list:
    return [polish_root(f, lo, hi) for lo, hi in bracket_roots(f, interval, n_probes)]


# ---------------------------------------------------------------------------
# limit extraction toward an endpoint
# ---------------------------------------------------------------------------

def richardson_limit(xs, ws, basis=None) -> tuple:
    """Limit of w(x) as x -> 0 from samples on nodes decreasing toward 0.

    With `basis` (callables of x describing the known correction shapes) a
    least-squares fit of  w = c + sum_i a_i b_i(x)  is used; otherwise
    iterated Aitken acceleration on the node sequence.  Returns (limit,
    error_estimate) and raises ExtrapolationError when the sequence is not
    settling.
    """
    xs = np.asarray(xs, dtype=float)
    ws = np.asarray(ws, dtype=complex)
    order = np.argsort(-xs)  # toward the endpoint
    xs, ws = xs[order], ws[order]
    if xs.size < 4:
        raise ExtrapolationError("need at least 4 nodes to extrapolate")

    if basis:
        cols = [np.ones_like(xs)] + [np.asarray(b(xs), dtype=complex) for b in basis]
        A = np.vstack(cols).T
        coef, *_ = np.linalg.lstsq(A, ws, rcond=None)
        resid = float(np.abs(A @ coef - ws).max())
        limit = complex(coef[0])
        scale = max(1.0, abs(limit))
        if resid > 1e-4 * scale:
            raise ExtrapolationError(
                f"correction-basis fit residual {resid:.2e} too large"
            )
        return limit, resid

    seq = ws.copy()
    deltas = np.abs(np.diff(seq))
    if deltas.size >= 3 and deltas[-1] > 10 * deltas[0] and deltas[-1] > 1e-9:
        raise ExtrapolationError("Wronskian sequence diverges toward the endpoint")
    last_err = math.inf
    for _ in range(3):
        if seq.size < 3:
            break
        denom = seq[2:] - 2 * seq[1:-1] + seq[:-2]
        num = (seq[2:] - seq[1:-1]) ** 2
        safe = np.abs(denom) > 1e-300
        acc = seq[2:].copy()
        acc[safe] = seq[2:][safe] - num[safe] / denom[safe]
        seq = acc
        if seq.size >= 2:
            last_err = abs(seq[-1] - seq[-2])
    limit = complex(seq[-1])
    err = last_err if math.isfinite(last_err) else abs(ws[-1] - ws[-2])
    scale = max(1.0, abs(limit))
    if err > 1e-2 * scale:
        raise ExtrapolationError(f"extrapolation not converged (delta {err:.2e})")
    return limit, err
