"""Exception types shared across the library."""


class ConfigurationError(ValueError):
    """Problem or run configuration is inconsistent (bad geometry, target
    inside an obstacle, grid spacing incompatible with the switching rates, ...)."""


class RateMatrixError(ValueError):
    """A transition-rate matrix violates shape or sign constraints."""


class IrreducibilityError(ValueError):
    """The mode chain is reducible where an irreducible one is required."""


class UnreachableModeError(ValueError):
    """A hitting time was requested between modes that never communicate."""


class ConvergenceError(RuntimeError):
    """Sweeping failed to converge within the sweep cap."""


class NoPolicyError(RuntimeError):
    """Policy queried at a state with no usable value information."""
