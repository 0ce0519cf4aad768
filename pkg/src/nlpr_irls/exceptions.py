"""Exception types raised by the solvers and diagnostics."""


class DimensionMismatchError(ValueError):
    """Raised when vectors and anchors do not share a dimension."""


class InvariantViolationError(RuntimeError):
    """Raised when a runtime-verified solver property fails.

    With exact arithmetic these properties always hold, so a violation
    points to an implementation bug rather than to the instance.
    """


class DegenerateDenominatorError(ValueError):
    """Raised when a rate diagnostic would divide by a vanishing distance."""


class InsufficientDataError(ValueError):
    """Raised when a trace is too short to fit a convergence rate."""
