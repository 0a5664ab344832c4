"""Exception hierarchy shared by every module in the package."""


class UpwindSbpError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(UpwindSbpError, ValueError):
    """A parameter is out of range or inconsistent with the others."""


class UnsupportedOrderError(InvalidArgumentError):
    """The requested operator order is not implemented."""


class DegenerateParametersError(UpwindSbpError, ArithmeticError):
    """A closed form is singular at the requested parameters."""


class NumericalFailureError(UpwindSbpError, ArithmeticError):
    """A root finder or linear solve did not produce a usable answer."""


class DecompositionFailureError(UpwindSbpError):
    """The banded reconstruction of a symmetric matrix is not exact."""


class NumericalBlowupError(UpwindSbpError, FloatingPointError):
    """Time integration produced non-finite or runaway values."""


class InsufficientDataError(InvalidArgumentError):
    """Too few samples to fit a convergence rate."""
