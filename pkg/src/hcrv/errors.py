"""Exception types shared across the package."""


class HcrvError(Exception):
    """Base class for all package errors."""


class EmptyGroup(HcrvError):
    """A group of observations is empty."""


class NonFinite(HcrvError):
    """An observation is NaN or infinite."""


class InvalidParam(HcrvError):
    """A model parameter violates its constraint."""

    def __init__(self, field, message=None):
        self.field = field
        super().__init__(message or f"invalid parameter: {field}")


class DomainError(HcrvError):
    """Argument outside the mathematical domain of a function."""


class MaxIterExceeded(HcrvError):
    """An iterative numerical scheme failed to converge."""


class BudgetExceeded(HcrvError):
    """Rejection sampling exceeded its proposal budget."""


class NumericalFailure(HcrvError):
    """A numerical subroutine produced no usable result."""


class ModeError(HcrvError):
    """Operation invoked in an incompatible sampler mode."""


class DegenerateChain(HcrvError):
    """Chain too short or constant for diagnostics."""


class NoSolution(HcrvError):
    """Root-finding failed within the search bracket."""
