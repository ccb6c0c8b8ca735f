"""Reference-mode pairs at regular or limit-circle endpoints.

A pair (phi1, phi2) of real solutions at the reference energy E0, normalized
to the quasi-derivative Wronskian p W[phi1, phi2] = 1, carries the boundary
data of any wave function psi through the two limits

    c1 = lim -p W[phi2, psi],      c2 = lim p W[phi1, psi]

taken toward the endpoint (c1, c2 are then the coefficients of psi along
phi1, phi2).  Modes are stored as closed-form asymptotic heads (leading plus
first subleading behaviour, evaluated near the endpoint where subtraction of
diverging terms would otherwise destroy precision) together with numerically
extended tails reaching into the interior.

On sides approached from above (the minus side of a line, right interval
ends) the first mode carries a sign flip so that the x-space Wronskian
normalization is +1 regardless of orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .classify import (
    LIMIT_POINT,
    EndpointInfo,
    classify_endpoint,
    endpoint_info,
)
from .errors import ConfigError, ExtrapolationError, LimitPointEndpointError
from .model import (
    Coulomb,
    CoulombCentrifugal,
    Free,
    InverseSquare,
    PotentialSpec,
    PowerLaw,
    Problem,
    Tabulated,
)
from .numerics import Grid, SolutionSamples, integrate_stationary, richardson_limit

TAIL_NODES = 400
DEFAULT_TAIL_EXTENT = 5.0


@dataclass(frozen=True)
class LimitNumbers:
    """Coefficients of a wave function along the reference modes, with the
    extrapolation error estimate."""

    c1: complex
    c2: complex
    error: float


@dataclass(frozen=True)
class ReferenceModePair:
    """Normalized mode pair at one endpoint: x-space head callables
    (value, quasi-derivative) plus numerically extended tails."""

    problem: Problem
    info: EndpointInfo
    E0: float
    phi1: object  # callable x -> (value, p*dvalue/dx)
    phi2: object
    valid_radius: float
    correction_basis: tuple  # callables of the inward distance
    tail1: SolutionSamples | None = None
    tail2: SolutionSamples | None = None

    @property
    def endpoint(self) -> str:
        return self.info.name

    def inward_distance(self, x):
        return self.info.orientation * (np.asarray(x, dtype=float) - self.info.coordinate)

    def head_wronskians(self, psi: SolutionSamples):
        """(xi, pW[phi1, psi], pW[phi2, psi]) on psi's nodes inside the head's
        validity radius, ordered toward the endpoint."""
        x = psi.grid.nodes
        xi = self.inward_distance(x)
        mask = (xi > 0) & (xi <= self.valid_radius)
        if mask.sum() < 4:
            raise ExtrapolationError(
                "psi carries fewer than 4 nodes inside the reference-mode head region"
            )
        xs = x[mask]
        v1, q1 = self.phi1(xs)
        v2, q2 = self.phi2(xs)
        w1 = v1 * psi.p_dpsi[mask] - q1 * psi.psi[mask]
        w2 = v2 * psi.p_dpsi[mask] - q2 * psi.psi[mask]
        return xi[mask], w1, w2


def _power_heads(s, norm, weight_amp, weight_exp):
    """x-space head factory for a pure power mode norm * xi**s."""

    def head(info: EndpointInfo, sign: float):
        def f(x):
            xi = info.orientation * (np.asarray(x, dtype=float) - info.coordinate)
            val = sign * norm * xi**s
            qd = (
                sign
                * info.orientation
                * norm
                * weight_amp
                * s
                * xi ** (weight_exp + s - 1.0)
            )
            return val, qd

        return f

    return head


def _build_heads(problem: Problem, info: EndpointInfo, verdict):
    """Return (phi1_factory, phi2_factory, valid_radius, basis) in terms of the
    inward distance; factories take (info, sign)."""
    pot = problem.potential
    fam = pot.family
    w = pot.weight

    if isinstance(fam, Tabulated):
        key = info.name if info.name in fam.endpoint_powers else "origin"
        if key not in fam.endpoint_powers:
            raise ConfigError("tabulated potential has no declared asymptotics here")
        coeff, expo = fam.endpoint_powers[key]
        fam = PowerLaw(coeff, expo)

    # regular endpoint: chi1 = -xi, chi2 = 1 (shifted to the endpoint)
    regular = verdict == "regular"
    if regular:
        p_e = float(pot.p(info.coordinate + info.orientation * 1e-12)) if not w.is_identity else 1.0

        def phi1_factory(i, sign):
            def f(x):
                xi = i.orientation * (np.asarray(x, dtype=float) - i.coordinate)
                return sign * (-xi) / p_e, sign * i.orientation * (-1.0) * np.ones_like(xi)

            return f

        def phi2_factory(i, sign):
            def f(x):
                xi = i.orientation * (np.asarray(x, dtype=float) - i.coordinate)
                return sign * np.ones_like(xi), np.zeros_like(xi)

            return f

        # pW[1, psi] = psi' picks up a linear-in-xi drift from psi''(0)
        basis = (lambda t: t, lambda t: t**2, lambda t: t**3)
        return phi1_factory, phi2_factory, 0.5, basis

    if isinstance(fam, (Coulomb, CoulombCentrifugal)) and w.is_identity:
        l = fam.l if isinstance(fam, CoulombCentrifugal) else 0
        if l != 0:
            raise LimitPointEndpointError("centrifugal channel is limit point at 0")
        g = fam.g
        lg = math.log(abs(g))
        d2 = (g * g * lg - 1.5 * g * g) / 2.0

        def phi1_factory(i, sign):
            def f(x):
                xi = i.orientation * (np.asarray(x, dtype=float) - i.coordinate)
                val = -(xi + 0.5 * g * xi**2 + g * g * xi**3 / 12.0)
                der = -(1.0 + g * xi + 0.25 * g * g * xi**2)
                return sign * val, sign * i.orientation * der

            return f

        def phi2_factory(i, sign):
            def f(x):
                xi = i.orientation * (np.asarray(x, dtype=float) - i.coordinate)
                ln = np.log(xi)
                val = 1.0 + g * xi * (ln + lg) + 0.5 * g * g * xi**2 * ln + d2 * xi**2
                der = g * (ln + lg) + g + g * g * xi * ln + 0.5 * g * g * xi + 2.0 * d2 * xi
                return sign * val, sign * i.orientation * der

            return f

        basis = (
            lambda t: t**2 * np.log(t),
            lambda t: t**2,
            lambda t: t**3 * np.log(t) ** 2,
        )
        return phi1_factory, phi2_factory, min(2e-2, 2e-2 / abs(g)), basis

    if isinstance(fam, PowerLaw) and w.is_identity and -2.0 < fam.exponent < 0.0 and fam.exponent != -1.0:
        # weak singularity: phi1 = -xi(1 + ...), phi2 = 1 + b xi^(m+2)/((m+1)(m+2))
        b, m = fam.coefficient, fam.exponent

        def phi1_factory(i, sign):
            def f(x):
                xi = i.orientation * (np.asarray(x, dtype=float) - i.coordinate)
                val = -(xi + b * xi ** (m + 3.0) / ((m + 2.0) * (m + 3.0)))
                der = -(1.0 + b * xi ** (m + 2.0) / (m + 2.0))
                return sign * val, sign * i.orientation * der

            return f

        def phi2_factory(i, sign):
            def f(x):
                xi = i.orientation * (np.asarray(x, dtype=float) - i.coordinate)
                val = 1.0 + b * xi ** (m + 2.0) / ((m + 1.0) * (m + 2.0))
                der = b * xi ** (m + 1.0) / (m + 1.0)
                return sign * val, sign * i.orientation * der

            return f

        basis = (lambda t, mm=m: t ** (mm + 3.0), lambda t: t**2)
        return phi1_factory, phi2_factory, 5e-2, basis

    if isinstance(fam, PowerLaw) and fam.exponent == -1.0 and w.is_identity:
        return _build_heads(
            Problem(problem.domain, PotentialSpec(Coulomb(fam.coefficient), w), problem.bc),
            info,
            verdict,
        )

    # scale-invariant balance: p = A xi^a, V leading b xi^(a-2)
    if w.is_power:
        A, a_exp = w.amplitude, w.exponent
        if isinstance(fam, Free):
            b = 0.0
        elif isinstance(fam, InverseSquare) and a_exp == 0.0:
            b = fam.c
        elif isinstance(fam, PowerLaw) and fam.exponent == a_exp - 2.0:
            b = fam.coefficient
        else:
            raise ConfigError(
                f"no built-in reference modes for {type(fam).__name__} with this weight"
            )
        disc = (a_exp - 1.0) ** 2 + 4.0 * b / A
        if disc > 0:
            r = math.sqrt(disc)
            sp, sm = (1.0 - a_exp + r) / 2.0, (1.0 - a_exp - r) / 2.0
            phi1_factory = _power_heads(sp, 1.0, A, a_exp)
            phi2_factory = _power_heads(sm, 1.0 / (A * (sm - sp)), A, a_exp)
            basis = (
                lambda t, e=2.0 * sm + 1.0: t**e,
                lambda t: t**2,
            )
            return phi1_factory, phi2_factory, 0.2, basis
        if disc == 0:
            s = (1.0 - a_exp) / 2.0

            def phi1_factory(i, sign, s=s):
                return _power_heads(s, 1.0, A, a_exp)(i, sign)

            def phi2_factory(i, sign, s=s):
                def f(x):
                    xi = i.orientation * (np.asarray(x, dtype=float) - i.coordinate)
                    ln = np.log(xi)
                    val = xi**s * ln / A
                    qd = (s * xi ** (s - 1.0) * ln + xi ** (s - 1.0)) * xi**a_exp
                    return sign * val, sign * i.orientation * qd

                return f

            return phi1_factory, phi2_factory, 0.2, (lambda t: t**2,)
        # complex roots: real oscillatory pair xi^h cos/sin(nu ln xi)
        h = (1.0 - a_exp) / 2.0
        nu = math.sqrt(-disc) / 2.0

        def phi1_factory(i, sign):
            def f(x):
                xi = i.orientation * (np.asarray(x, dtype=float) - i.coordinate)
                u = nu * np.log(xi)
                val = xi**h * np.cos(u)
                d = xi ** (h - 1.0) * (h * np.cos(u) - nu * np.sin(u))
                return sign * val, sign * i.orientation * A * xi**a_exp * d

            return f

        def phi2_factory(i, sign):
            def f(x):
                xi = i.orientation * (np.asarray(x, dtype=float) - i.coordinate)
                u = nu * np.log(xi)
                val = xi**h * np.sin(u) / (nu * A)
                d = xi ** (h - 1.0) * (h * np.sin(u) + nu * np.cos(u)) / (nu * A)
                return sign * val, sign * i.orientation * A * xi**a_exp * d

            return f

        return phi1_factory, phi2_factory, 0.2, (lambda t: t**2,)

    raise ConfigError("tabulated kinetic weight carries no built-in asymptotics")


def _extend_tail(problem, info, E0, head, extent):
    """Integrate one head from near the endpoint into the interior; samples
    are returned on the physical (signed) coordinate grid."""
    seed_xi = 1e-5
    xi_grid = Grid.log_toward_endpoint(seed_xi, extent, TAIL_NODES, endpoint="left")
    x_nodes = info.coordinate + info.orientation * xi_grid.nodes
    if info.orientation > 0:
        grid = Grid(x_nodes, "log")
        v0, q0 = head(np.array([x_nodes[0]]))
        return integrate_stationary(
            problem, E0, "left", (complex(v0[0]), complex(q0[0])), grid
        )
    grid = Grid(x_nodes[::-1], "log")
    v0, q0 = head(np.array([grid.nodes[-1]]))
    return integrate_stationary(
        problem, E0, "right", (complex(v0[0]), complex(q0[0])), grid
    )


def reference_modes(
    problem: Problem,
    endpoint: str,
    E0: float | None = None,
    extend: bool = True,
    extent: float = DEFAULT_TAIL_EXTENT,
) -> ReferenceModePair:
    """Construct the normalized mode pair at a regular or limit-circle
    endpoint, refusing limit-point ones."""
    info = endpoint_info(problem, endpoint)
    if info.at_infinity:
        raise LimitPointEndpointError("infinite endpoints carry no reference modes here")
    cls = classify_endpoint(problem, endpoint)
    if cls.verdict == LIMIT_POINT:
        raise LimitPointEndpointError(
            f"endpoint {endpoint!r} is limit point; no boundary condition applies"
        )
    if E0 is None:
        E0 = problem.E0

    phi1_factory, phi2_factory, valid_radius, basis = _build_heads(problem, info, cls.verdict)
    # one sign flip on the first mode keeps pW[phi1, phi2] = +1 on minus sides
    s1 = -1.0 if info.orientation < 0 else 1.0
    phi1 = phi1_factory(info, s1)
    phi2 = phi2_factory(info, 1.0)

    tail1 = tail2 = None
    if extend:
        tail1 = _extend_tail(problem, info, E0, phi1, extent)
        tail2 = _extend_tail(problem, info, E0, phi2, extent)

    return ReferenceModePair(
        problem=problem,
        info=info,
        E0=E0,
        phi1=phi1,
        phi2=phi2,
        valid_radius=min(valid_radius, extent),
        correction_basis=tuple(basis),
        tail1=tail1,
        tail2=tail2,
    )


def second_solution(phi1: SolutionSamples, x0: float) -> SolutionSamples:
    """Reduction of order: phi2 = phi1 * integral_x0^x dt / (p phi1^2).

    The returned quasi-derivative is built from the same relation, which
    makes p W[phi1, phi2] = 1 hold identically.
    """
    x = phi1.grid.nodes
    psi = phi1.psi
    if np.min(np.abs(psi)) < 1e-12 * np.max(np.abs(psi)):
        raise ConfigError("phi1 vanishes inside the integration range")
    p = phi1.p if phi1.p is not None else np.ones_like(x)
    integrand = 1.0 / (p * psi**2)
    cum = cumulative_simpson(integrand.real, x=x, initial=0.0) + 1j * cumulative_simpson(
        integrand.imag, x=x, initial=0.0
    )
    i0 = phi1.grid.nearest_index(x0)
    integral = cum - cum[i0]
    psi2 = psi * integral
    p_dpsi2 = phi1.p_dpsi * integral + 1.0 / psi
    return SolutionSamples(phi1.grid, psi2, p_dpsi2, phi1.p)


def limit_numbers(psi: SolutionSamples, modes: ReferenceModePair) -> LimitNumbers:
    """Extract (c1, c2) of psi along the modes by extrapolating the head
    Wronskians over the last grid decades toward the endpoint."""
    # a regular endpoint sampled at the endpoint itself needs no limit: the
    # Wronskians there are exact
    x = psi.grid.nodes
    xi_all = modes.inward_distance(x)
    on_end = np.where(xi_all == 0.0)[0]
    if on_end.size:
        i = int(on_end[0])
        v1, q1 = modes.phi1(np.array([x[i]]))
        v2, q2 = modes.phi2(np.array([x[i]]))
        if np.all(np.isfinite([v1[0], q1[0], v2[0], q2[0]])):
            w1 = complex(v1[0] * psi.p_dpsi[i] - q1[0] * psi.psi[i])
            w2 = complex(v2[0] * psi.p_dpsi[i] - q2[0] * psi.psi[i])
            return LimitNumbers(c1=-w2, c2=w1, error=0.0)
    xi, w1, w2 = modes.head_wronskians(psi)
    # keep the three decades nearest the endpoint: beyond them the truncated
    # correction basis no longer describes the Wronskian drift
    cut = min(float(np.min(xi)) * 1e3, modes.valid_radius)
    mask = xi <= cut
    if mask.sum() >= 4:
        xi, w1, w2 = xi[mask], w1[mask], w2[mask]
    basis = modes.correction_basis
    c2, e2 = richardson_limit(xi, w1, basis=basis)
    c1m, e1 = richardson_limit(xi, w2, basis=basis)
    return LimitNumbers(c1=-c1m, c2=c2, error=max(e1, e2))
