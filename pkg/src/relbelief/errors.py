"""Exception hierarchy shared by all modules."""


class RelBeliefError(Exception):
    """Base class for package errors."""


class DomainError(RelBeliefError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InsufficientDataError(DomainError):
    pass


class DegenerateInputError(DomainError):
    pass


class NumericError(RelBeliefError, ArithmeticError):
    """A computation could not be carried out to the required accuracy."""


class NoSolutionError(NumericError):
    pass


class UnstableError(NumericError):
    """A ratio would be formed with a denominator below the stability floor."""


class EstimationError(NumericError):
    pass


class ConsistencyError(RelBeliefError, AssertionError):
    """An internal invariant was violated."""
