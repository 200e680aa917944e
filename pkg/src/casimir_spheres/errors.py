"""Exception hierarchy shared by all modules."""


class CasimirError(Exception):
    """Base class for errors raised by this package."""


class DomainError(CasimirError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ConvergenceError(CasimirError, RuntimeError):
    """A series did not converge within the configured term cap."""


class QuadratureError(CasimirError, RuntimeError):
    """A numerical integration failed to reach the requested accuracy."""


class FitError(CasimirError, RuntimeError):
    """Least-squares optimization did not converge."""


class AccuracyWarning(UserWarning):
    """Result returned, but with degraded accuracy (tail-dominated regime)."""
