"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Operator and state disagree on the number of modes or dimensions."""


class UnsupportedStateError(ValueError):
    """A criterion was asked to evaluate a state it is not defined for."""


class PreconditionError(ValueError):
    """A criterion's validity condition is not met by the input."""


class DegenerateStateError(ValueError):
    """The requested superposition cancels to the zero vector."""


class CapacityError(RuntimeError):
    """The dense oracle was asked for a matrix above its size cap."""


class TruncationWarning(UserWarning):
    """A truncated series lost more norm than the reporting threshold."""
