"""Exception types shared across the package."""


class GtrCellError(Exception):
    """Base class for all package errors."""


class DomainError(GtrCellError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericError(GtrCellError, ArithmeticError):
    """A numerical routine did not meet its tolerance.

    The best available estimate is kept on the exception so callers can
    still report a partial result.
    """

    def __init__(self, message, value=None, err_est=None):
        super().__init__(message)
        self.value = value
        self.err_est = err_est


class ConfigError(GtrCellError):
    """A run configuration is malformed or inconsistent."""
