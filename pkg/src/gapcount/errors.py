"""Exception hierarchy shared by all modules."""


class GapcountError(Exception):
    """Base class for package errors."""


class ConfigurationError(GapcountError, ValueError):
    """Invalid input, configuration, or precondition."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class NumericalError(GapcountError, ArithmeticError):
    """A numerical procedure failed to converge or lost accuracy."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class RangeError(ConfigurationError):
    """A sampled quantity was queried outside its table."""
