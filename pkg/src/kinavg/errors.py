"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid grid, parameter, or configuration value."""


class NumericError(ArithmeticError):
    """A computation produced non-finite values or violated a checked bound."""


class SupportError(ValueError):
    """A field or test function leaks outside its admissible velocity support."""
