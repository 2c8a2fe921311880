"""Error taxonomy shared by every module."""


class FracDiffError(Exception):
    """Base class for all library errors."""


class DomainError(FracDiffError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UsageError(FracDiffError, ValueError):
    """Inputs are individually valid but inconsistent (shapes, horizons, families)."""


class ConvergenceError(FracDiffError, RuntimeError):
    """A series or iteration hit its term/iteration cap before reaching tolerance."""


class ResolventSetError(FracDiffError, ArithmeticError):
    """``lambda I - A`` is singular within the pivot threshold."""


class MethodInapplicableError(FracDiffError, ValueError):
    """The requested construction method's precondition does not hold."""


class InadmissibleGrowthError(DomainError):
    """A time function grows too fast for the Poisson transform to converge."""


class ForcingError(FracDiffError, RuntimeError):
    """A forcing callback returned non-finite values or violated its declaration."""

    def __init__(self, message, n=None):
        super().__init__(message)
        self.n = n
