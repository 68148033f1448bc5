class SalientError(Exception):
    """Base class for every error raised by the library."""

    exit_code = 1


class ConfigError(SalientError, ValueError):
    """Invalid configuration, network specification or command usage."""

    exit_code = 1


class DataError(SalientError, ValueError):
    """Malformed, missing or inconsistent input data."""

    exit_code = 2


class NumericError(SalientError, ArithmeticError):
    """Non-finite values appeared during a numerical computation."""

    exit_code = 3
