"""Exception types shared across the package."""


class UbmlabError(Exception):
    """Base class for all package-specific errors."""


class InvalidDimensionError(UbmlabError, ValueError):
    """Matrix dimension is zero or negative."""


class ContractViolationError(UbmlabError, ValueError):
    """An input violates a documented precondition (e.g. non-unitary state)."""


class InvalidGridError(UbmlabError, ValueError):
    """A time grid is not increasing or does not start at zero."""


class InvalidInputError(UbmlabError, ValueError):
    """Generic invalid argument (empty measure list, bad order, ...)."""


class AtomCapExceededError(UbmlabError, ValueError):
    """Exact transport LP requested above the configured atom cap."""


class InvalidQuantileError(UbmlabError, ValueError):
    """Sampled quantile function is not monotone."""


class PrecisionLossError(UbmlabError, ArithmeticError):
    """A numerical result cannot be delivered at the guaranteed accuracy.

    Carries ``achieved_log10`` with the base-10 log of the magnitude that
    could not be represented, when known.
    """

    def __init__(self, message, achieved_log10=None):
        super().__init__(message)
        self.achieved_log10 = achieved_log10


class NumericError(UbmlabError, RuntimeError):
    """An underlying numerical routine (eigensolver, LP) failed."""
