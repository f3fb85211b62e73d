class LevyLibError(Exception):
    """Base class for every error raised by levylib."""


class InvalidMeasureError(LevyLibError, ValueError):
    pass


class BasisRangeError(LevyLibError, IndexError):
    pass


class DomainError(LevyLibError, ValueError):
    pass


class IncompatibleIndexError(LevyLibError, ValueError):
    pass


class UnsupportedOrderError(LevyLibError, ValueError):
    pass


class ConvergenceError(LevyLibError, ArithmeticError):
    pass


class ConfigError(LevyLibError, ValueError):
    """Configuration could not be parsed or validated.

    ``errors`` holds every ``(key_path, message)`` pair found, not just the
    first one. ``line`` is set for TOML syntax errors.
    """

    def __init__(self, errors, line=None):
        self.errors = list(errors)
        self.line = line
        super().__init__('; '.join(f'{key}: {msg}' for key, msg in self.errors))
