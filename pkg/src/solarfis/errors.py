"""Exception types shared across the package.

Everything derives from :class:`SolarfisError`.  The subclasses that signal
bad arguments also derive from :class:`ValueError` so that generic callers
(sklearn pipelines, CLI wrappers) can catch them without importing this
module.
"""


class SolarfisError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SolarfisError):
    """A data or config file could not be parsed.

    Carries ``line`` (1-based line number) when the source is line oriented.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class IntegrityError(SolarfisError):
    """Timestamps out of order or not uniformly spaced."""


class GapError(SolarfisError):
    """A missing value sits inside a range that must be gap free."""


class LengthError(SolarfisError, ValueError):
    """A series is too short for the requested operation."""


class ShapeError(SolarfisError, ValueError):
    """Dimension mismatch or empty input."""


class RangeError(SolarfisError, ValueError):
    """A boundary or count lies outside the data it is applied to."""


class ConfigError(SolarfisError, ValueError):
    """An invalid configuration value or combination."""


class NumericError(SolarfisError):
    """A non-finite value appeared where finite arithmetic is required."""


class DegenerateError(SolarfisError, ValueError):
    """A denominator or normalizer is degenerate (e.g. zero variance)."""
