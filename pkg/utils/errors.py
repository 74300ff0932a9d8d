"""
Exception hierarchy shared by the engines and the command-line entry point
"""


class RingWalkError(Exception):
    """Base class for all simulator errors"""

    exit_code: int = 1


class ConfigError(RingWalkError):
    """Run configuration could not be read or parsed"""

    exit_code = 2


class SpecValidationError(RingWalkError, ValueError):
    """A device, coupler or run description violates its invariants"""

    exit_code = 3


class DimensionMismatchError(SpecValidationError):
    """State vector and transition matrix have incompatible shapes"""


class NonConvergenceError(RingWalkError, RuntimeError):
    """Iteration cap exceeded or the transient mass stopped contracting"""

    exit_code = 4

    def __init__(self, message: str, steps: int = 0, residual: float = float("nan")):
        super().__init__(message)
        self.steps = steps
        self.residual = residual
