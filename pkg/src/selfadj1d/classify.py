"""Endpoint classification: regular / limit-circle / limit-point.

The analytic path reads Frobenius exponents off the built-in families; the
numerical path integrates two independent solutions toward the endpoint and
watches the decade-by-decade growth of the norm integral.  Both must agree;
the numerical test falls back to exponents when its decade statistics are
inconclusive (slowly converging integrals near the coupling threshold).

The square-integrability measure is plain dx throughout: a vanishing kinetic
weight p(x) makes an endpoint singular but does not enter the norm.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError
from .model import (
    HALF_LINE,
    INTERVAL,
    LINE,
    Coulomb,
    CoulombCentrifugal,
    Free,
    InverseSquare,
    PotentialSpec,
    PowerLaw,
    Problem,
    Tabulated,
)
from .numerics import SINGULAR_START, Grid, integrate_stationary

REGULAR = "regular"
LIMIT_CIRCLE = "limit_circle"
LIMIT_POINT = "limit_point"

# LC/LP boundary of c/x^2 in internal units (exponent (1-sqrt(1+4c))/2 = -1/2)
INVERSE_SQUARE_THRESHOLD = 0.75

_DECADE_GROWTH = 10.0
_TAIL_FRACTION = 1e-6


def inverse_square_threshold() -> float:
    """Coupling c* separating limit circle (c < c*) from limit point for c/x**2."""
    return INVERSE_SQUARE_THRESHOLD


@dataclass(frozen=True)
class Evidence:
    kind: str  # "analytic" or "numerical_l2"
    decade_integrals: tuple = ()
    note: str = ""


@dataclass(frozen=True)
class EndpointClassification:
    verdict: str
    frobenius_exponents: tuple | None
    evidence: Evidence

    def __post_init__(self):
        if self.verdict not in (REGULAR, LIMIT_CIRCLE, LIMIT_POINT):
            raise ConfigError(f"unknown verdict {self.verdict!r}")


# ---------------------------------------------------------------------------
# endpoint bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EndpointInfo:
    """Where an endpoint sits and how the inward coordinate runs."""

    name: str
    at_infinity: bool
    coordinate: float  # finite endpoints only
    orientation: int  # +1: domain extends to larger x, -1: to smaller x


def endpoint_info(problem: Problem, endpoint: str) -> EndpointInfo:
    kind = problem.domain.kind
    names = problem.domain.endpoint_names
    if endpoint not in names:
        raise ConfigError(
            f"endpoint {endpoint!r} not in {names} for domain kind {kind!r}"
        )
    if kind == HALF_LINE:
        if endpoint == "origin":
            return EndpointInfo(endpoint, False, 0.0, +1)
        return EndpointInfo(endpoint, True, math.inf, +1)
    if kind == LINE:
        table = {
            "origin_plus": EndpointInfo(endpoint, False, 0.0, +1),
            "origin_minus": EndpointInfo(endpoint, False, 0.0, -1),
            "plus_infinity": EndpointInfo(endpoint, True, math.inf, +1),
            "minus_infinity": EndpointInfo(endpoint, True, -math.inf, -1),
        }
        return table[endpoint]
    a, b = problem.domain.endpoints
    if endpoint == "left":
        return EndpointInfo(endpoint, False, a, +1)
    return EndpointInfo(endpoint, False, b, -1)


# ---------------------------------------------------------------------------
# analytic path
# ---------------------------------------------------------------------------

def _indicial_roots(b_over_a: float, a_exp: float):
    """Roots of s(s + a_exp - 1) = b/A for the scale-invariant balance."""
    disc = (a_exp - 1.0) ** 2 + 4.0 * b_over_a
    if disc >= 0:
        r = math.sqrt(disc)
        return ((1.0 - a_exp + r) / 2.0, (1.0 - a_exp - r) / 2.0), True
    r = cmath.sqrt(complex(disc))
    return ((1.0 - a_exp) / 2.0 + r / 2.0, (1.0 - a_exp) / 2.0 - r / 2.0), False


def _l2_near_zero(s) -> bool:
    """Is |x^s|^2 integrable toward 0 (strict inequality at the boundary)?"""
    return (s.real if isinstance(s, complex) else s) > -0.5


def _l2_near_infinity(s) -> bool:
    return (s.real if isinstance(s, complex) else s) < -0.5


def _balanced_power_data(potential: PotentialSpec):
    """(A, a_exp, b, matched) for p = A x^a with V's leading power b x^{a-2}."""
    w = potential.weight
    if not w.is_power:
        return None
    A, a_exp = w.amplitude, w.exponent
    fam = potential.family
    if isinstance(fam, Free):
        return A, a_exp, 0.0, True
    if isinstance(fam, InverseSquare):
        return A, a_exp, fam.c, a_exp == 0.0
    if isinstance(fam, CoulombCentrifugal):
        return A, a_exp, float(fam.l * (fam.l + 1)), a_exp == 0.0
    if isinstance(fam, PowerLaw):
        return A, a_exp, fam.coefficient, fam.exponent == a_exp - 2.0
    return None


def _classify_origin_analytic(problem: Problem) -> EndpointClassification:
    pot = problem.potential
    fam = pot.family
    w = pot.weight
    if not w.is_power:
        raise ConfigError("tabulated kinetic weight needs declared asymptotics")

    if w.is_identity:
        if isinstance(fam, Free):
            return EndpointClassification(
                REGULAR, (1.0, 0.0), Evidence("analytic", note="bounded potential")
            )
        if isinstance(fam, (Coulomb, CoulombCentrifugal)):
            l = fam.l if isinstance(fam, CoulombCentrifugal) else 0
            if l == 0:
                # 1/r is too weak to push the log-modified mode out of L^2
                return EndpointClassification(
                    LIMIT_CIRCLE,
                    (1.0, 0.0),
                    Evidence("analytic", note="Coulomb s-wave, log-modified mode in L2"),
                )
            return EndpointClassification(
                LIMIT_POINT,
                (float(l + 1), float(-l)),
                Evidence("analytic", note=f"centrifugal l(l+1) = {l*(l+1)} >= 3/4"),
            )
        if isinstance(fam, InverseSquare):
            (sp, sm), real = _indicial_roots(fam.c, 0.0)
            exps = (sp, sm) if real else None
            if real and not (_l2_near_zero(sp) and _l2_near_zero(sm)):
                return EndpointClassification(
                    LIMIT_POINT, exps, Evidence("analytic", note=f"c = {fam.c} >= 3/4")
                )
            return EndpointClassification(
                LIMIT_CIRCLE,
                exps,
                Evidence("analytic", note=f"c = {fam.c} < 3/4"),
            )
        if isinstance(fam, PowerLaw):
            b, m = fam.coefficient, fam.exponent
            if m >= 0:
                return EndpointClassification(
                    REGULAR, (1.0, 0.0), Evidence("analytic", note="bounded potential")
                )
            if m > -2.0:
                return EndpointClassification(
                    LIMIT_CIRCLE,
                    (1.0, 0.0),
                    Evidence("analytic", note="weaker than 1/x^2: both Frobenius modes in L2"),
                )
            if m == -2.0:
                return _classify_origin_analytic(
                    Problem(problem.domain, PotentialSpec(InverseSquare(b), w), problem.bc)
                )
            verdict = LIMIT_POINT if b > 0 else LIMIT_CIRCLE
            note = "strong repulsive core" if b > 0 else "strongly attractive: oscillatory collapse, both WKB modes in L2"
            return EndpointClassification(verdict, None, Evidence("analytic", note=note))
        if isinstance(fam, Tabulated):
            if "origin" not in fam.endpoint_powers:
                raise ConfigError(
                    "tabulated potential needs declared endpoint asymptotics at the origin"
                )
            coeff, expo = fam.endpoint_powers["origin"]
            return _classify_origin_analytic(
                Problem(problem.domain, PotentialSpec(PowerLaw(coeff, expo), w), problem.bc)
            )
        raise ConfigError(f"no analytic classification for {type(fam).__name__}")

    # genuine kinetic weight p = A x^a: the endpoint is singular whenever a != 0
    data = _balanced_power_data(pot)
    if data is None or not data[3]:
        raise ConfigError(
            "weighted operators are classified analytically only for the "
            "scale-invariant balance V ~ b x^(a-2)"
        )
    A, a_exp, b, _ = data
    (sp, sm), real = _indicial_roots(b / A, a_exp)
    exps = (sp, sm) if real else None
    both = (
        _l2_near_zero(sp) and _l2_near_zero(sm) if real else _l2_near_zero(sp)
    )
    verdict = LIMIT_CIRCLE if both else LIMIT_POINT
    return EndpointClassification(
        verdict, exps, Evidence("analytic", note=f"indicial roots of s(s+{a_exp}-1) = {b/A}")
    )


def _classify_infinity_analytic(problem: Problem) -> EndpointClassification:
    pot = problem.potential
    fam = pot.family
    w = pot.weight
    if not w.is_power:
        raise ConfigError("tabulated kinetic weight needs declared asymptotics")

    if w.is_identity:
        if isinstance(fam, PowerLaw) and fam.coefficient < 0 and fam.exponent > 2.0:
            # fall faster than -x^2: both WKB modes decay in norm
            return EndpointClassification(
                LIMIT_CIRCLE, None, Evidence("analytic", note="super-quadratic fall-off")
            )
        if isinstance(fam, Tabulated) and "infinity" in fam.endpoint_powers:
            coeff, expo = fam.endpoint_powers["infinity"]
            return _classify_infinity_analytic(
                Problem(problem.domain, PotentialSpec(PowerLaw(coeff, expo), w), problem.bc)
            )
        # every decaying or bounded-below-by -x^2 tail is limit point at infinity
        return EndpointClassification(
            LIMIT_POINT, None, Evidence("analytic", note="infinite endpoint, sub-quadratic tail")
        )
    data = _balanced_power_data(pot)
    if data is None or not data[3]:
        raise ConfigError(
            "weighted operators are classified analytically only for the "
            "scale-invariant balance V ~ b x^(a-2)"
        )
    A, a_exp, b, _ = data
    (sp, sm), real = _indicial_roots(b / A, a_exp)
    exps = (sp, sm) if real else None
    both = (
        _l2_near_infinity(sp) and _l2_near_infinity(sm) if real else _l2_near_infinity(sp)
    )
    verdict = LIMIT_CIRCLE if both else LIMIT_POINT
    return EndpointClassification(
        verdict, exps, Evidence("analytic", note="indicial roots tested against the x -> inf norm")
    )


# ---------------------------------------------------------------------------
# numerical L2 path
# ---------------------------------------------------------------------------

def _decade_contributions(x: np.ndarray, density: np.ndarray, toward_zero: bool):
    lo, hi = x[0], x[-1]
    n_dec = int(round(math.log10(hi / lo)))
    edges = np.geomspace(lo, hi, n_dec + 1)
    contribs = []
    for i in range(n_dec):
        mask = (x >= edges[i]) & (x <= edges[i + 1])
        if mask.sum() < 2:
            contribs.append(0.0)
            continue
        contribs.append(float(np.trapezoid(density[mask], x[mask])))
    # order the decades marching toward the endpoint under test
    return contribs[::-1] if toward_zero else contribs


def _numeric_verdict(contribs):
    total = sum(contribs)
    if total == 0:
        return None
    ratios = [b / a for a, b in zip(contribs[:-1], contribs[1:]) if a > 0]
    if len(ratios) >= 2 and min(ratios[-2:]) > _DECADE_GROWTH:
        return LIMIT_POINT  # norm integral grows by > 10x per decade
    if contribs[-1] < _TAIL_FRACTION * total:
        return LIMIT_CIRCLE
    return None


def _classify_numeric(problem: Problem, info: EndpointInfo, E0: float):
    """Integrate two independent solutions toward the endpoint and test the
    norm decade by decade.  Returns (verdict or None, Evidence)."""
    if info.at_infinity:
        anchor, far = 1.0, 1.0e3
        grid = Grid.log_toward_endpoint(anchor, far, 400, endpoint="right")
        start = "left"
        toward_zero = False
    else:
        anchor = 1.0
        grid = Grid.log_toward_endpoint(SINGULAR_START * 0.1, anchor, 500, endpoint="left")
        start = "right"
        toward_zero = True

    contribs = []
    verdicts = []
    for seed in ((1.0, 0.0), (0.0, 1.0)):
        try:
            sol = integrate_stationary(problem, E0, start, seed, grid)
            density = np.abs(sol.psi) ** 2
            c = _decade_contributions(grid.nodes, density, toward_zero)
        except NumericalError:
            # blow-up while approaching the endpoint: certainly not L2
            c = [1.0, 1e12]
        contribs.append(tuple(c))
        verdicts.append(_numeric_verdict(c))

    if LIMIT_POINT in verdicts:
        verdict = LIMIT_POINT
    elif all(v == LIMIT_CIRCLE for v in verdicts):
        verdict = LIMIT_CIRCLE
    else:
        verdict = None
    return verdict, Evidence("numerical_l2", decade_integrals=tuple(contribs))


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def classify_endpoint(
    problem: Problem, endpoint: str, E0: float | None = None, method: str = "analytic"
) -> EndpointClassification:
    """Classify one endpoint of the problem's domain.

    `method` picks the evidence path: "analytic" (Frobenius fast path),
    "numeric" (decade-wise norm integration at E0, falling back to the
    analytic exponents when inconclusive), or "auto" (analytic when the
    family supports it).
    """
    info = endpoint_info(problem, endpoint)
    if E0 is None:
        E0 = problem.E0

    def analytic():
        if info.at_infinity:
            return _classify_infinity_analytic(problem)
        if info.coordinate == 0.0 or problem.domain.kind == LINE:
            return _classify_origin_analytic(problem)
        # finite endpoint away from the singularity
        v = problem.v(info.coordinate)
        p = problem.p(info.coordinate)
        if np.isfinite(v) and p > 0:
            return EndpointClassification(
                REGULAR, (1.0, 0.0), Evidence("analytic", note="bounded potential")
            )
        return _classify_origin_analytic(problem)

    if method == "analytic":
        return analytic()
    if method == "auto":
        try:
            return analytic()
        except ConfigError:
            method = "numeric"
    if method != "numeric":
        raise ConfigError(f"unknown classification method {method!r}")

    if not info.at_infinity and info.coordinate != 0.0:
        return analytic()  # regular finite endpoints need no integration
    verdict, evidence = _classify_numeric(problem, info, E0)
    if verdict is None:
        # borderline decade statistics: defer to the exponents
        ref = analytic()
        return EndpointClassification(
            ref.verdict,
            ref.frobenius_exponents,
            Evidence(
                "numerical_l2",
                evidence.decade_integrals,
                note="inconclusive decades, resolved by Frobenius exponents",
            ),
        )
    ref = None
    try:
        ref = analytic()
    except ConfigError:
        pass
    return EndpointClassification(
        verdict, ref.frobenius_exponents if ref else None, evidence
    )


def deficiency_indices(problem: Problem) -> tuple:
    """(n, n): one deficiency dimension per regular or limit-circle side."""
    n = 0
    for name in problem.domain.endpoint_names:
        if classify_endpoint(problem, name).verdict in (REGULAR, LIMIT_CIRCLE):
            n += 1
    return (n, n)
