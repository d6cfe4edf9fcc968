"""Exception hierarchy.

The CLI maps these onto exit codes: validation problems exit with 2,
numerical/conditioning failures with 3 and malformed scan requests with 4.
"""


class GaussentError(Exception):
    """Base class for all package errors."""


class ValidationError(GaussentError, ValueError):
    """A state violates one of its structural invariants."""


class DomainError(GaussentError, ValueError):
    """An argument lies outside the domain of an operation."""


class NumericalError(GaussentError, ArithmeticError):
    """Base class for failures of the numerics themselves."""


class SingularStateError(NumericalError):
    """A matrix that must be positive definite is not."""


class ConditioningError(NumericalError):
    """A matrix is too ill-conditioned to invert reliably."""


class NonNormalizableError(NumericalError):
    """A mode sits at (or beyond) the eta = 1 boundary."""


class DivergenceError(NumericalError):
    """Time integration produced non-finite values."""


class UnsupportedOracleInput(GaussentError, ValueError):
    """An oracle was called outside the scope in which it is exact."""


class ScanSpecError(GaussentError, ValueError):
    """A scan request is malformed or exceeds the safety cap."""
