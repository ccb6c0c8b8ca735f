"""Domain model: units, domains, potentials, boundary parameters, problems.

Internal convention
-------------------
All computation inside this package uses units with hbar**2/(2m) = 1 and
hbar = 1 (hence m = 1/2).  The stationary equation is then

    -(p(x) psi')' + V(x) psi = E psi

and the time-dependent one is  i dpsi/dt = H psi.  Conversion to and from
physical units happens only at ingestion/emission via :class:`Units`.

Boundary parametrization
------------------------
A reflecting endpoint carries a Robin condition  psi(0) + L psi'(0) = 0,
encoded internally by the angle theta in [0, 2pi) with L = L0*cot(theta/2);
theta = 0 is the L = infinity (Neumann) case, theta = pi is Dirichlet.
An interior singular point on the line carries a 2x2 unitary U.  The four
real parameters (L_plus, L_minus, mixing angle, phase angle) are a package
convention, not unique: U = V diag(e^{i theta+}, e^{i theta-}) V* where
V = [[cos(a/2), -sin(a/2) e^{-i phi}], [sin(a/2) e^{i phi}, cos(a/2)]],
L_pm = L0*cot(theta_pm/2).  Mixing angle a = 0 means the two half lines
decouple into Robin walls L_plus and L_minus; the phase angle phi
multiplies the off-diagonal coupling by e^{i phi} (a point-like vector
potential).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError

DEFAULT_L0 = 1.0

UNITARITY_TOL = 1e-12


# ---------------------------------------------------------------------------
# units
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Units:
    """Physical hbar and mass; internal convention is hbar**2/(2m) = 1."""

    hbar: float = 1.0
    mass: float = 0.5

    def __post_init__(self):
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ConfigError(f"hbar must be positive and finite, got {self.hbar}")
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ConfigError(f"mass must be positive and finite, got {self.mass}")

    @property
    def energy_scale(self) -> float:
        """Multiply a raw potential/energy by this to get internal units."""
        return 2.0 * self.mass / self.hbar**2

    @property
    def is_internal(self) -> bool:
        return abs(self.energy_scale - 1.0) < 1e-15

    def to_internal_energy(self, e: float) -> float:
        return e * self.energy_scale

    def to_physical_energy(self, e: float) -> float:
        return e / self.energy_scale


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

HALF_LINE = "half_line"
LINE = "line"
INTERVAL = "interval"

# endpoint identifiers per domain kind
_ENDPOINTS = {
    HALF_LINE: ("origin", "infinity"),
    LINE: ("origin_plus", "origin_minus", "plus_infinity", "minus_infinity"),
    INTERVAL: ("left", "right"),
}


@dataclass(frozen=True)
class Domain1D:
    """1-D configuration space: half line (0, inf), line with a marked
    interior singular point at 0, or a finite interval."""

    kind: str
    endpoints: tuple = (0.0, math.inf)

    def __post_init__(self):
        if self.kind not in _ENDPOINTS:
            raise ConfigError(f"unknown domain kind {self.kind!r}")
        a, b = self.endpoints
        if not a < b:
            raise ConfigError(f"endpoints must be ordered, got {self.endpoints}")
        if self.kind == HALF_LINE and self.endpoints != (0.0, math.inf):
            raise ConfigError("half line is (0, inf)")
        if self.kind == LINE and self.endpoints != (-math.inf, math.inf):
            raise ConfigError("line is (-inf, inf)")
        if self.kind == INTERVAL and not all(map(math.isfinite, self.endpoints)):
            raise ConfigError("interval endpoints must be finite")

    @staticmethod
    def half_line() -> "Domain1D":
        return Domain1D(HALF_LINE, (0.0, math.inf))

    @staticmethod
    def line() -> "Domain1D":
        return Domain1D(LINE, (-math.inf, math.inf))

    @staticmethod
    def interval(a: float, b: float) -> "Domain1D":
        return Domain1D(INTERVAL, (float(a), float(b)))

    @property
    def endpoint_names(self) -> tuple:
        return _ENDPOINTS[self.kind]


# ---------------------------------------------------------------------------
# kinetic weight p(x)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KineticWeight:
    """Coefficient p(x) of the kinetic term -(p psi')'.

    Power law p(x) = amplitude * |x|**exponent by default (identity when
    amplitude = 1, exponent = 0), or tabulated positive samples.
    """

    amplitude: float = 1.0
    exponent: float = 0.0
    x_samples: np.ndarray | None = None
    p_samples: np.ndarray | None = None

    def __post_init__(self):
        if self.x_samples is None:
            if self.amplitude <= 0:
                raise ConfigError("weight amplitude must be positive")
        else:
            p = np.asarray(self.p_samples, dtype=float)
            if not np.all(np.isfinite(p)) or np.any(p <= 0):
                raise ConfigError("tabulated weight must be finite and positive")

    @property
    def is_identity(self) -> bool:
        return self.x_samples is None and self.exponent == 0.0 and self.amplitude == 1.0

    @property
    def is_power(self) -> bool:
        return self.x_samples is None

    def __call__(self, x):
        if self.x_samples is not None:
            spline = CubicSpline(self.x_samples, self.p_samples)
            return spline(x)
        if self.exponent == 0.0:
            return self.amplitude * np.ones_like(np.asarray(x, dtype=float))
        return self.amplitude * np.abs(x) ** self.exponent


IDENTITY_WEIGHT = KineticWeight()


# ---------------------------------------------------------------------------
# potential families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Free:
    """V = 0."""

    def __call__(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class InverseSquare:
    """V = c / x**2 with dimensionless c (internal units)."""

    c: float

    def __call__(self, x):
        return self.c / np.asarray(x, dtype=float) ** 2


@dataclass(frozen=True)
class Coulomb:
    """V = g / r; attractive for g < 0.  Radial s-wave reduction."""

    g: float

    def __call__(self, x):
        return self.g / np.asarray(x, dtype=float)


@dataclass(frozen=True)
class CoulombCentrifugal:
    """V = g / r + l(l+1) / r**2, the radial channel with angular momentum l."""

    g: float
    l: int

    def __post_init__(self):
        if self.l < 0 or self.l != int(self.l):
            raise ConfigError("l must be a non-negative integer")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.g / x + self.l * (self.l + 1) / x**2


@dataclass(frozen=True)
class PowerLaw:
    """V = coefficient * |x|**exponent.

    Covers e.g. the inverted-free operator -(x^4 psi')' - 2 x^2 psi that the
    coordinate inversion x -> 1/x produces from the free half line.
    """

    coefficient: float
    exponent: float

    def __call__(self, x):
        return self.coefficient * np.abs(np.asarray(x, dtype=float)) ** self.exponent


@dataclass(frozen=True)
class Tabulated:
    """Sampled potential on a regular sub-grid.

    Singular endpoint behaviour must be declared as a leading power law,
    ``endpoint_powers[side] = (coefficient, exponent)``, before any endpoint
    classification can run.
    """

    x_samples: np.ndarray
    v_samples: np.ndarray
    endpoint_powers: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.v_samples, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ConfigError("tabulated potential must be finite on its sub-grid")

    def __call__(self, x):
        spline = CubicSpline(self.x_samples, self.v_samples)
        return spline(np.abs(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class PotentialSpec:
    """A potential family plus the kinetic weight p(x)."""

    family: object
    weight: KineticWeight = IDENTITY_WEIGHT

    def __post_init__(self):
        if isinstance(self.family, InverseSquare) and self.family.c == 0.0:
            object.__setattr__(self, "family", Free())

    def v(self, x):
        return self.family(x)

    def p(self, x):
        return self.weight(x)


# ---------------------------------------------------------------------------
# boundary conditions
# ---------------------------------------------------------------------------

def robin_from_theta(theta: float, L0: float = DEFAULT_L0) -> float:
    """Map the U(1) angle to the Robin length, L = L0*cot(theta/2).

    theta = 0 yields the infinity sentinel (Neumann), theta = pi yields 0
    (Dirichlet).  Bijective from [0, 2pi) onto R union {inf}.
    """
    if not 0.0 <= theta < 2.0 * math.pi:
        raise ConfigError(f"theta must lie in [0, 2pi), got {theta}")
    if theta == 0.0:
        return math.inf
    if theta == math.pi:
        return 0.0  # tan(pi/2) is finite in floats; pin Dirichlet exactly
    return L0 / math.tan(theta / 2.0)


def theta_from_robin(L: float, L0: float = DEFAULT_L0) -> float:
    """Inverse of :func:`robin_from_theta`; L may be the infinity sentinel."""
    if math.isinf(L):
        return 0.0
    # atan2 keeps theta/2 in (0, pi), i.e. theta in (0, 2pi)
    return 2.0 * math.atan2(L0, L)


@dataclass(frozen=True)
class HalfLineRobin:
    """Robin wall psi(0) + L psi'(0) = 0, stored as the angle theta.

    The infinity sentinel never enters arithmetic paths: theta = 0 is the
    Neumann case and the angle is the primary representation.
    """

    theta: float
    L0: float = DEFAULT_L0

    def __post_init__(self):
        if not 0.0 <= self.theta < 2.0 * math.pi:
            raise ConfigError(f"theta must lie in [0, 2pi), got {self.theta}")

    @staticmethod
    def from_length(L: float, L0: float = DEFAULT_L0) -> "HalfLineRobin":
        return HalfLineRobin(theta_from_robin(L, L0), L0)

    @property
    def L(self) -> float:
        return robin_from_theta(self.theta, self.L0)

    @property
    def is_neumann(self) -> bool:
        return self.theta == 0.0

    @property
    def is_dirichlet(self) -> bool:
        return self.L == 0.0


def _mixing_matrix(mixing: float, phase: float) -> np.ndarray:
    c, s = math.cos(mixing / 2.0), math.sin(mixing / 2.0)
    return np.array(
        [[c, -s * np.exp(-1j * phase)], [s * np.exp(1j * phase), c]], dtype=complex
    )


@dataclass(frozen=True)
class LineU2:
    """U(2) connection condition across the marked point of a line."""

    U: np.ndarray
    L0: float = DEFAULT_L0

    def __post_init__(self):
        U = np.asarray(self.U, dtype=complex)
        if U.shape != (2, 2):
            raise ConfigError("U must be a 2x2 matrix")
        dev = np.abs(U @ U.conj().T - np.eye(2)).max()
        if dev > UNITARITY_TOL:
            raise ConfigError(f"U is not unitary (entrywise deviation {dev:.2e})")
        object.__setattr__(self, "U", U)

    @staticmethod
    def from_params(
        L_plus: float,
        L_minus: float,
        mixing: float = 0.0,
        phase: float = 0.0,
        L0: float = DEFAULT_L0,
    ) -> "LineU2":
        """Build U = V diag(e^{i theta+}, e^{i theta-}) V* from the package's
        (L+, L-, mixing, phase) convention."""
        tp = theta_from_robin(L_plus, L0)
        tm = theta_from_robin(L_minus, L0)
        d = np.diag([np.exp(1j * tp), np.exp(1j * tm)])
        v = _mixing_matrix(mixing, phase)
        return LineU2(v @ d @ v.conj().T, L0)

    @property
    def params(self) -> dict:
        """Extract (L_plus, L_minus, mixing_angle, phase_angle).

        Eigenphases are ordered so the first column of the eigenbasis has the
        larger weight on the plus channel; degenerate U yields mixing 0.
        """
        w, v = np.linalg.eig(self.U)
        theta = np.mod(np.angle(w), 2.0 * math.pi)
        if np.isclose(theta[0], theta[1], atol=1e-12):
            return {
                "L_plus": robin_from_theta(theta[0], self.L0),
                "L_minus": robin_from_theta(theta[1], self.L0),
                "mixing_angle": 0.0,
                "phase_angle": 0.0,
            }
        # order eigenvectors so the first is the one aligned with channel +
        order = np.argsort(-np.abs(v[0, :]))
        w, v = w[order], v[:, order]
        theta = np.mod(np.angle(w), 2.0 * math.pi)
        vec = v[:, 0]
        vec = vec * np.exp(-1j * np.angle(vec[0]))  # first component real >= 0
        mixing = 2.0 * math.atan2(abs(vec[1]), vec[0].real)
        phase = float(np.angle(vec[1])) if abs(vec[1]) > 1e-14 else 0.0
        return {
            "L_plus": robin_from_theta(float(theta[0]), self.L0),
            "L_minus": robin_from_theta(float(theta[1]), self.L0),
            "mixing_angle": mixing,
            "phase_angle": phase,
        }

    @property
    def is_separated(self) -> bool:
        off = abs(self.U[0, 1]) + abs(self.U[1, 0])
        return off < 1e-13


# ---------------------------------------------------------------------------
# problem
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Problem:
    """A potential on a domain plus the self-adjointness parameters."""

    domain: Domain1D
    potential: PotentialSpec
    bc: object
    E0: float = 0.0

    def __post_init__(self):
        if isinstance(self.bc, HalfLineRobin):
            if self.domain.kind not in (HALF_LINE, INTERVAL):
                raise ConfigError("Robin condition requires a half line or interval")
        elif isinstance(self.bc, LineU2):
            if self.domain.kind != LINE:
                raise ConfigError("U(2) condition requires a line domain")
        elif self.bc is not None:
            raise ConfigError(f"unknown boundary condition {type(self.bc).__name__}")

    def v(self, x):
        return self.potential.v(x)

    def p(self, x):
        return self.potential.p(x)


def _rescale_family(family, s: float):
    if isinstance(family, Free):
        return family
    if isinstance(family, InverseSquare):
        return InverseSquare(family.c * s)
    if isinstance(family, Coulomb):
        return Coulomb(family.g * s)
    if isinstance(family, CoulombCentrifugal):
        # centrifugal term is geometric, only g carries raw energy units
        return CoulombCentrifugal(family.g * s, family.l)
    if isinstance(family, PowerLaw):
        return PowerLaw(family.coefficient * s, family.exponent)
    if isinstance(family, Tabulated):
        return Tabulated(
            family.x_samples,
            np.asarray(family.v_samples, dtype=float) * s,
            {k: (c * s, e) for k, (c, e) in family.endpoint_powers.items()},
        )
    raise ConfigError(f"unknown potential family {type(family).__name__}")


def to_internal_units(problem: Problem, units: Units) -> Problem:
    """Rescale raw potential couplings and E0 so that hbar**2/(2m) = 1.

    Lengths (and the Robin L) are untouched; the rescaling is invertible via
    :func:`to_physical_units`.
    """
    s = units.energy_scale
    pot = replace(problem.potential, family=_rescale_family(problem.potential.family, s))
    return replace(problem, potential=pot, E0=problem.E0 * s)


def to_physical_units(problem: Problem, units: Units) -> Problem:
    """Inverse of :func:`to_internal_units`."""
    s = 1.0 / units.energy_scale
    pot = replace(problem.potential, family=_rescale_family(problem.potential.family, s))
    return replace(problem, potential=pot, E0=problem.E0 * s)


# ---------------------------------------------------------------------------
# config ingestion (JSON-compatible dicts; schema documented in README)
# ---------------------------------------------------------------------------

_FAMILY_BUILDERS = {
    "free": lambda p: Free(),
    "inverse_square": lambda p: InverseSquare(float(p["c"])),
    "coulomb": lambda p: Coulomb(float(p["g"])),
    "coulomb_centrifugal": lambda p: CoulombCentrifugal(float(p["g"]), int(p["l"])),
    "power_law": lambda p: PowerLaw(float(p["coefficient"]), float(p["exponent"])),
    "tabulated": lambda p: Tabulated(
        np.asarray(p["x"], dtype=float),
        np.asarray(p["v"], dtype=float),
        {k: tuple(v) for k, v in p.get("endpoint_powers", {}).items()},
    ),
}


def _check_keys(section: dict, allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in {where}")


def problem_from_config(cfg: dict) -> Problem:
    """Build a Problem from a JSON-compatible dict; unknown keys rejected.

    Raw couplings are rescaled to internal units when a ``units`` section is
    present.
    """
    _check_keys(cfg, {"domain", "potential", "bc", "E0", "units"}, "problem")
    for key in ("domain", "potential", "bc"):
        if key not in cfg:
            raise ConfigError(f"problem section is missing {key!r}")

    dom_cfg = cfg["domain"]
    _check_keys(dom_cfg, {"kind", "endpoints"}, "domain")
    kind = dom_cfg.get("kind")
    if kind == HALF_LINE:
        domain = Domain1D.half_line()
    elif kind == LINE:
        domain = Domain1D.line()
    elif kind == INTERVAL:
        domain = Domain1D.interval(*dom_cfg["endpoints"])
    else:
        raise ConfigError(f"unknown domain kind {kind!r}")

    pot_cfg = cfg["potential"]
    _check_keys(pot_cfg, {"family", "params", "weight"}, "potential")
    fam_name = pot_cfg.get("family")
    if fam_name not in _FAMILY_BUILDERS:
        raise ConfigError(f"unknown potential family {fam_name!r}")
    try:
        family = _FAMILY_BUILDERS[fam_name](pot_cfg.get("params", {}))
    except KeyError as exc:
        raise ConfigError(f"potential family {fam_name!r} is missing parameter {exc}")
    weight_cfg = pot_cfg.get("weight")
    if weight_cfg is None:
        weight = IDENTITY_WEIGHT
    else:
        _check_keys(weight_cfg, {"amplitude", "exponent", "x", "p"}, "weight")
        if "x" in weight_cfg:
            weight = KineticWeight(
                x_samples=np.asarray(weight_cfg["x"], dtype=float),
                p_samples=np.asarray(weight_cfg["p"], dtype=float),
            )
        else:
            weight = KineticWeight(
                float(weight_cfg.get("amplitude", 1.0)),
                float(weight_cfg.get("exponent", 0.0)),
            )
    potential = PotentialSpec(family, weight)

    bc_cfg = cfg["bc"]
    _check_keys(bc_cfg, {"variant", "params"}, "bc")
    variant = bc_cfg.get("variant")
    params = bc_cfg.get("params", {})
    L0 = float(params.get("L0", DEFAULT_L0))
    if variant == "robin":
        _check_keys(params, {"L", "theta", "L0"}, "bc.params")
        if "theta" in params:
            bc = HalfLineRobin(float(params["theta"]), L0)
        elif "L" in params:
            L = math.inf if params["L"] in ("inf", "infinity") else float(params["L"])
            bc = HalfLineRobin.from_length(L, L0)
        else:
            raise ConfigError("robin bc needs 'L' or 'theta'")
    elif variant == "u2":
        _check_keys(
            params,
            {"matrix", "L_plus", "L_minus", "mixing", "phase", "L0"},
            "bc.params",
        )
        if "matrix" in params:
            m = params["matrix"]
            U = np.array(
                [[complex(re, im) for re, im in row] for row in m], dtype=complex
            )
            bc = LineU2(U, L0)
        else:
            def _len(v):
                return math.inf if v in ("inf", "infinity") else float(v)

            bc = LineU2.from_params(
                _len(params["L_plus"]),
                _len(params["L_minus"]),
                float(params.get("mixing", 0.0)),
                float(params.get("phase", 0.0)),
                L0,
            )
    else:
        raise ConfigError(f"unknown bc variant {variant!r}")

    problem = Problem(domain, potential, bc, float(cfg.get("E0", 0.0)))
    if "units" in cfg:
        _check_keys(cfg["units"], {"hbar", "mass"}, "units")
        units = Units(float(cfg["units"]["hbar"]), float(cfg["units"]["mass"]))
        problem = to_internal_units(problem, units)
    return problem
