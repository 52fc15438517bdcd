"""Exception types raised by tanchain."""


class TanchainError(Exception):
    """Base class for all package errors."""


class InvalidConfigError(TanchainError, ValueError):
    """Physical parameters are missing, non-positive or mutually inconsistent."""


class SingularityError(TanchainError, ValueError):
    """A site sits on (or beyond) the tan^2 pole at |i| = L_eff/2."""


class ConvergenceError(TanchainError, RuntimeError):
    """The eigensolver failed or produced an eigenpair outside tolerance."""


class ChebyshevBudgetError(TanchainError, RuntimeError):
    """Requested time step needs more Chebyshev terms than allowed."""


class BoundaryTruncationError(TanchainError, ValueError):
    """A wave packet loses too much weight to the chain boundary."""
