"""Self-adjoint boundary conditions on limit numbers.

With the mode pair normalized to p W[phi1, phi2] = 1, the boundary maps are
the Wronskian limits

    half line:  Gamma1 = p W[phi1, psi](+0),   Gamma2 = p W[phi2, psi](+0)
    line:       Gamma1 = (pW[phi1, psi](+0),  pW[phi1, psi](-0))
                Gamma2 = (pW[phi2, psi](+0), -pW[phi2, psi](-0))

i.e. Gamma1 = c2 and Gamma2 = -c1 in terms of the limit numbers, and the
minus sign on the lower Gamma2 component is load-bearing: it makes a
diagonal U decouple into two half-line Robin walls with the inward-derivative
convention.  At a regular endpoint this reduces to Gamma1 = psi(0),
Gamma2 = L0 psi'(0).

The accepted wave functions satisfy Gamma1 + L Gamma2 = 0 (half line, L = 0
selecting the phi1-regular ray) or (U-1) Gamma1 + i (U+1) Gamma2 = 0 (line).

A transparent point on the free line (psi and psi' both continuous) is the
permutation matrix U = [[0, 1], [1, 0]]: its eigenvectors (1, 1) and
(1, -1) must carry eigenvalues +1 and -1 so that both continuity conditions
follow from the U(2) condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import LINE, Problem, theta_from_robin, robin_from_theta
from .numerics import SolutionSamples
from .refmodes import ReferenceModePair, limit_numbers, reference_modes

U2_TOL = 1e-12


@dataclass(frozen=True)
class BoundaryData:
    """Boundary-space vectors built from limit numbers; dimension matches the
    deficiency index (1 on a half line, 2 across a line singularity)."""

    gamma1: np.ndarray
    gamma2: np.ndarray

    def __post_init__(self):
        g1 = np.atleast_1d(np.asarray(self.gamma1, dtype=complex))
        g2 = np.atleast_1d(np.asarray(self.gamma2, dtype=complex))
        if g1.shape != g2.shape or g1.ndim != 1 or g1.size not in (1, 2):
            raise ConfigError("boundary vectors must share dimension 1 or 2")
        object.__setattr__(self, "gamma1", g1)
        object.__setattr__(self, "gamma2", g2)

    @property
    def n(self) -> int:
        return self.gamma1.size


@dataclass(frozen=True)
class ConditionCheck:
    satisfied: bool
    residual: float  # normalized against max(|Gamma1|, |L Gamma2|)
    raw_residual: float


def boundary_data(psi, problem: Problem, modes=None, E0: float | None = None) -> BoundaryData:
    """Extract (Gamma1, Gamma2) of a wave function.

    `psi` is one SolutionSamples on a half line, or a (plus_side, minus_side)
    pair of SolutionSamples for a line problem (the minus-side grid lives on
    negative coordinates).  Reference modes are built on demand; pass `modes`
    (one pair, or a 2-tuple of pairs for the line) to reuse them.
    """
    if problem.domain.kind == LINE:
        psi_plus, psi_minus = psi
        if modes is None:
            modes = (
                reference_modes(problem, "origin_plus", E0, extend=False),
                reference_modes(problem, "origin_minus", E0, extend=False),
            )
        lp = limit_numbers(psi_plus, modes[0])
        lm = limit_numbers(psi_minus, modes[1])
        return BoundaryData(
            gamma1=np.array([lp.c2, lm.c2]),
            gamma2=np.array([-lp.c1, lm.c1]),
        )
    if modes is None:
        modes = reference_modes(problem, "origin", E0, extend=False)
    ln = limit_numbers(psi, modes)
    return BoundaryData(gamma1=np.array([ln.c2]), gamma2=np.array([-ln.c1]))


def robin_satisfied(data: BoundaryData, L: float, tol: float = 1e-8) -> ConditionCheck:
    """Check Gamma1 + L Gamma2 = 0 (|Gamma2| = 0 when L is infinite)."""
    if data.n != 1:
        raise ConfigError("Robin condition needs a one-dimensional boundary space")
    g1 = complex(data.gamma1[0])
    g2 = complex(data.gamma2[0])
    if math.isinf(L):
        raw = abs(g2)
        scale = max(abs(g1), abs(g2), 1e-300)
    else:
        raw = abs(g1 + L * g2)
        # |L| floored at the reference length so the Dirichlet verdict still
        # compares psi(0) against the size of psi rather than against itself
        scale = max(abs(g1), max(abs(L), 1.0) * abs(g2), 1e-300)
    residual = raw / scale
    return ConditionCheck(residual <= tol, residual, raw)


def u2_satisfied(data: BoundaryData, U: np.ndarray, tol: float = 1e-8) -> ConditionCheck:
    """Check (U - 1) Gamma1 + i (U + 1) Gamma2 = 0."""
    if data.n != 2:
        raise ConfigError("U(2) condition needs a two-dimensional boundary space")
    U = np.asarray(U, dtype=complex)
    if U.shape != (2, 2) or np.abs(U @ U.conj().T - np.eye(2)).max() > U2_TOL:
        raise ConfigError("U must be 2x2 unitary")
    vec = (U - np.eye(2)) @ data.gamma1 + 1j * (U + np.eye(2)) @ data.gamma2
    raw = float(np.linalg.norm(vec))
    scale = max(
        float(np.linalg.norm((U - np.eye(2)) @ data.gamma1)),
        float(np.linalg.norm((U + np.eye(2)) @ data.gamma2)),
        1e-300,
    )
    residual = raw / scale if scale > 0 else raw
    return ConditionCheck(residual <= tol, residual, raw)


@dataclass(frozen=True)
class RobinParameterMap:
    """Induced Moebius map on the Robin length under a mode re-choice.

    For modes phi' = M phi the boundary vectors transform linearly, and the
    length indexing the same self-adjoint domain becomes
    L' = (M11 L - M12) / (M22 - M21 L).
    """

    M: np.ndarray

    def __call__(self, L: float) -> float:
        m11, m12 = self.M[0]
        m21, m22 = self.M[1]
        if math.isinf(L):
            if abs(m21) < 1e-300:
                return math.inf
            return -m11 / m21
        num = m11 * L - m12
        den = m22 - m21 * L
        if abs(den) < 1e-300:
            return math.inf
        return num / den

    def map_theta(self, theta: float) -> float:
        return theta_from_robin(self(robin_from_theta(theta)))


def transform_modes(modes: ReferenceModePair, M) -> tuple:
    """Re-choose the reference modes by a unit-determinant real 2x2 matrix,
    phi' = M phi; returns the new pair plus the induced Robin-parameter map.

    The transformed pair keeps p W[phi1', phi2'] = det M = 1, and the set of
    accepted wave functions is unchanged once lengths are remapped.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2):
        raise ConfigError("mode transform must be a real 2x2 matrix")
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(det - 1.0) > 1e-12:
        raise ConfigError(f"mode transform must have det 1, got {det}")

    old1, old2 = modes.phi1, modes.phi2

    def combo(a, b):
        def f(x):
            v1, q1 = old1(x)
            v2, q2 = old2(x)
            return a * v1 + b * v2, a * q1 + b * q2

        return f

    def combine_tail(a, b):
        if modes.tail1 is None or modes.tail2 is None:
            return None
        t1, t2 = modes.tail1, modes.tail2
        return SolutionSamples(
            t1.grid, a * t1.psi + b * t2.psi, a * t1.p_dpsi + b * t2.p_dpsi, t1.p
        )

    new = ReferenceModePair(
        problem=modes.problem,
        info=modes.info,
        E0=modes.E0,
        phi1=combo(M[0, 0], M[0, 1]),
        phi2=combo(M[1, 0], M[1, 1]),
        valid_radius=modes.valid_radius,
        correction_basis=modes.correction_basis,
        tail1=combine_tail(M[0, 0], M[0, 1]),
        tail2=combine_tail(M[1, 0], M[1, 1]),
    )
    return new, RobinParameterMap(M)


def transparent_point_u2() -> np.ndarray:
    """The U enforcing psi and psi' continuity on the free line (see module
    docstring for the derivation)."""
    return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
