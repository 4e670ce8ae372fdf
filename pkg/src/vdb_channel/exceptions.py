"""Exception types raised across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class CapacityError(ValidationError):
    """Requested word width exceeds what an operation can materialize."""


class InvalidOperandError(ValidationError):
    """Set-valued convolution operands overlap in bit support."""


class EstimationError(RuntimeError):
    """Circuit parameters could not be recovered from measurements."""


class InconsistentMeasurementsError(EstimationError):
    """Measured levels contradict the pull-up ordering of the DCP endpoints."""


class InfeasibleError(RuntimeError):
    """No candidate satisfies the constraint tail."""
