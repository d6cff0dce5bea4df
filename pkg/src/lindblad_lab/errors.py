"""Exception and warning types shared across the package."""


class LindbladLabError(Exception):
    """Base class for all package errors."""


class ConfigurationError(LindbladLabError, ValueError):
    """Invalid or incomplete model parameters or scenario configuration."""


class NoSteadyStateError(LindbladLabError, ValueError):
    """The dynamics has no attracting stationary state for the given constants."""


class DegenerateCaseError(LindbladLabError, ValueError):
    """A closed form is singular for these constants; use the numerical path."""


class TruncationError(LindbladLabError, RuntimeError):
    """Population leaked to the edge of a truncated number basis."""


class ConsistencyError(LindbladLabError, RuntimeError):
    """An internal identity that must hold analytically failed numerically."""


class SingularOperatingPointError(LindbladLabError, ZeroDivisionError):
    """A steady-state rational expression has a vanishing denominator."""


class CriticalDampingFallback(UserWarning):
    """Issued when a critical-damping case is propagated by matrix exponential."""
