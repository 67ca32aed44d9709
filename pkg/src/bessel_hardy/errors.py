"""Exception hierarchy shared by all modules."""


class BesselHardyError(Exception):
    """Base class for library errors."""


class DomainError(BesselHardyError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BesselOverflowError(BesselHardyError, OverflowError):
    """The unscaled value does not fit in double precision."""


class PoleError(DomainError):
    """Gamma function evaluated at a pole."""


class QuadratureError(BesselHardyError):
    """A quadrature failed to reach its tolerance or certify its tail.

    Attributes
    ----------
    achieved : float
        The error estimate that was reached before giving up.
    """

    def __init__(self, message, achieved=float("nan")):
        super().__init__(message)
        self.achieved = achieved


class ConfigError(BesselHardyError, ValueError):
    """Invalid configuration or input file."""
