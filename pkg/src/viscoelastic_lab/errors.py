"""
Exception hierarchy for viscoelastic-lab.
"""


class LabError(Exception):
    """Base class for all errors raised by the laboratory."""


class ValidationError(LabError, ValueError):
    """A precondition on an input was violated."""


class ConfigError(ValidationError):
    """A configuration document could not be parsed or validated."""


class RegimeError(LabError, ArithmeticError):
    """The state left the small-perturbation regime (rho <= 0, 1+f4 <= 0, ...)."""


class StabilityError(LabError, RuntimeError):
    """
    A run produced non-finite values or violated its time step bound.

    Args:
        message: Human readable description.
        t: Simulation time at which the failure was detected.
        field: Name of the offending field, if known.
        stage: Runge-Kutta stage index, if known.
    """

    def __init__(self, message, t=None, field=None, stage=None):
        super().__init__(message)
        self.t = t
        self.field = field
        self.stage = stage


class SnapshotFormatError(LabError, ValueError):
    """A snapshot file is corrupt, truncated or of an unknown version."""
