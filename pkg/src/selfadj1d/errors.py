"""Exception hierarchy shared across the package."""


class SelfAdjointError(Exception):
    """Base class for all package errors."""


class ConfigError(SelfAdjointError):
    """Invalid or inconsistent configuration / construction input."""


class NumericalError(SelfAdjointError):
    """A numerical procedure failed to deliver its contract."""


class IntegrationOverflowError(NumericalError):
    """ODE integration blew up; carries the coordinate where it happened."""

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class ExtrapolationError(NumericalError):
    """Limit extraction did not converge (wave function outside the adjoint
    domain, or too few usable nodes near the endpoint)."""


class LimitPointEndpointError(SelfAdjointError):
    """Operation requires a regular or limit-circle endpoint."""


class ResolutionError(SelfAdjointError):
    """Time step or grid spacing cannot resolve the requested dynamics.

    Carries a suggestion so callers can retry.
    """

    def __init__(self, message, suggested_dt=None, suggested_h=None):
        super().__init__(message)
        self.suggested_dt = suggested_dt
        self.suggested_h = suggested_h
