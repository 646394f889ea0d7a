"""Exception hierarchy shared by all modules."""


class FreeCorrError(Exception):
    """Base class for every error raised by the package."""


class DomainError(FreeCorrError, ValueError):
    """Input outside the domain of an operation."""


class PreconditionError(DomainError):
    """A stated hypothesis of a verification routine does not hold."""


class ResourceError(FreeCorrError):
    """A configured size cap would be exceeded."""

    def __init__(self, message, size=None, cap=None):
        super().__init__(message)
        self.size = size
        self.cap = cap


class DegenerateDistributionError(DomainError):
    """The base variable is a scalar (zero variance)."""


class ConditioningError(FreeCorrError, ArithmeticError):
    """A Gram matrix is singular beyond the regularization policy."""

    def __init__(self, message, gram_condition=None, subset=None):
        super().__init__(message)
        self.gram_condition = gram_condition
        self.subset = subset


class NumericalError(FreeCorrError, ArithmeticError):
    """An iterative solver failed to converge."""

    def __init__(self, message, worst_point=None):
        super().__init__(message)
        self.worst_point = worst_point


class AtomError(NumericalError):
    """The measure carries atoms, so it has no density."""


class SupportWindowError(NumericalError):
    """The grid window does not capture the mass of the measure."""
