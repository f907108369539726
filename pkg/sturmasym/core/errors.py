"""
Exception hierarchy for the sturmasym package.

Every error raised on purpose by the library derives from SturmAsymError,
so callers (the CLI in particular) can map failures to exit codes.
"""

from typing import Optional


class SturmAsymError(Exception):
    """Base class for all library errors."""

    exit_code = 4


class ValidationError(SturmAsymError, ValueError):
    """A parameter is outside its admissible range."""

    exit_code = 2


class DomainError(SturmAsymError, ValueError):
    """A function was evaluated outside its domain (e.g. at the singular point)."""

    exit_code = 2


class ConditionsNotMetError(ValidationError):
    """The integrability hypotheses do not hold for the requested order N."""


class BudgetExceededError(SturmAsymError):
    """
    A numerical budget (panels, steps, iterations) ran out before the
    requested tolerance was reached.

    Attributes:
        best_value: Best available approximation when the budget ran out
        error_estimate: Error estimate attached to best_value
    """

    exit_code = 3

    def __init__(self, message: str, best_value: Optional[float] = None,
                 error_estimate: Optional[float] = None):
        super().__init__(message)
        self.best_value = best_value
        self.error_estimate = error_estimate


class QuadratureBudgetError(BudgetExceededError):
    """Adaptive quadrature hit max_panels before meeting tol."""


class ConvergenceError(BudgetExceededError):
    """An iteration (fixed point, Picard, secant) did not converge."""


class BracketNotFoundError(SturmAsymError):
    """No sign change of the eigenvalue mismatch was found in the admissible lambda range."""

    exit_code = 3


class NonFiniteCoefficientError(SturmAsymError):
    """A coefficient evaluated to NaN or infinity."""

    exit_code = 4


class NonMonotoneMismatchError(SturmAsymError):
    """The mismatch changed sign in the wrong order while bracketing."""

    exit_code = 4


class BranchAmbiguityError(SturmAsymError):
    """Zero counts of the shooting solution are inconsistent across a bracket."""

    exit_code = 4


def exit_code_for(error: BaseException) -> int:
    """
    Map an exception to a CLI exit status.

    Args:
        error: Exception raised while running a command

    Returns:
        2 for validation problems, 3 for exhausted budgets or missing
        brackets, 4 for internal inconsistencies and anything unexpected
    """
    if isinstance(error, SturmAsymError):
        return error.exit_code
    return 4


__all__ = [
    'SturmAsymError',
    'ValidationError',
    'DomainError',
    'ConditionsNotMetError',
    'BudgetExceededError',
    'QuadratureBudgetError',
    'ConvergenceError',
    'BracketNotFoundError',
    'NonFiniteCoefficientError',
    'NonMonotoneMismatchError',
    'BranchAmbiguityError',
    'exit_code_for',
]
