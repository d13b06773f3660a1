import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../../..')))


class SealError(Exception):
    """Base class for every error raised by the seal toolkit."""


class NullStateError(SealError, ValueError):
    def __init__(self, message: str = "null state") -> None:
        super().__init__(message)


class DimensionCapError(SealError, ValueError):
    """Raised when a dense path would exceed the configured dimension cap."""


class DimensionMismatchError(SealError, ValueError):
    pass


class CompletenessError(SealError, ValueError):
    """Raised when an instrument violates sum_m K_m^dagger K_m = I."""


class NotOrthonormalError(SealError, ValueError):
    def __init__(self, message: str = "seal states not orthonormal; projective decode undefined") -> None:
        super().__init__(message)


class SchemeError(SealError, ValueError):
    """Constructor or operation preconditions of a seal scheme are violated."""


class InvariantViolation(SealError, ArithmeticError):
    """A computed report fails one of its own numerical invariants."""


class ConfigError(SealError, ValueError):
    """Experiment config could not be parsed or validated."""


class ReportWriteError(SealError, OSError):
    pass
