"""Exception hierarchy."""


class GaarchError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(GaarchError, ValueError):
    """Argument outside the mathematical domain of a function."""


class StandardizationError(DomainError):
    """Tail parameters too small for the residual law to have unit variance."""


class StationarityError(DomainError):
    """Variance recursion parameters imply persistence >= 1."""


class NumericError(GaarchError, ArithmeticError):
    """Numerical breakdown that valid inputs should never produce."""


class InputError(GaarchError, ValueError):
    """Invalid user data (non-finite returns, zero variance, ...)."""


class SchemaError(InputError):
    """A required column or key is missing."""


class ParseError(InputError):
    """A cell could not be parsed."""


class ContinuityError(InputError):
    """Monthly dates are not consecutive."""
