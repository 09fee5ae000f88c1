"""Exception types shared across the package.

Every failure mode surfaced by the public API maps to one of the classes
below, so callers (and the CLI) can distinguish bad arguments from genuine
numerical trouble without string-matching messages.
"""

__all__ = [
    "RInterlaceError",
    "InvalidInputError",
    "UnsupportedDimensionError",
    "NumericalFailureError",
    "BudgetExceededError",
    "InsufficientDataError",
    "EstimatorDisagreementError",
]


class RInterlaceError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(RInterlaceError, ValueError):
    """An argument violates a documented precondition."""


class UnsupportedDimensionError(InvalidInputError):
    """Requested lattice dimension is outside the supported range (d >= 3)."""


class NumericalFailureError(RInterlaceError, RuntimeError):
    """A numerical routine could not reach its accuracy target.

    Parameters
    ----------
    message : str
        Human-readable description.
    condition : float, optional
        Condition-number estimate of the offending linear system, when one
        is available.
    """

    def __init__(self, message: str, condition: float | None = None):
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e})"
        super().__init__(message)
        self.condition = condition


class BudgetExceededError(RInterlaceError, RuntimeError):
    """A sampling loop hit its step budget; the sample must be discarded."""


class InsufficientDataError(RInterlaceError, RuntimeError):
    """Too few qualifying samples to form the requested estimate."""


class EstimatorDisagreementError(RInterlaceError, RuntimeError):
    """Independent derivative estimators disagree beyond the sigma limit.

    The message carries the seeds and the offending pair so the run can be
    replayed; this error is the loud-failure path of the cross-check that
    the package exists to perform.
    """
