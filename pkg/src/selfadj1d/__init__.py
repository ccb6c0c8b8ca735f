"""Self-adjoint extensions of 1-D Schrodinger operators with singular
potentials: endpoint classification, reference modes, boundary-condition
families, bound states, scattering, and unitary time evolution."""

from .model import (
    Coulomb,
    CoulombCentrifugal,
    Domain1D,
    Free,
    HalfLineRobin,
    InverseSquare,
    KineticWeight,
    LineU2,
    PotentialSpec,
    PowerLaw,
    Problem,
    Tabulated,
    Units,
    problem_from_config,
    robin_from_theta,
    theta_from_robin,
    to_internal_units,
    to_physical_units,
)
from .numerics import (
    Grid,
    SolutionSamples,
    bracket_roots,
    digamma,
    f_tilde,
    find_roots,
    integrate_stationary,
    wronskian,
)

__version__ = "0.1.0"
