"""
errors.py - Exception hierarchy for the simulator.

Every failure raised by the library derives from ARSimError so the command
line front end can map it to an exit code:
- ConfigError     -> 2
- DataError       -> 3 (ParseError, GeometryError, CorrectionLookupError)
- NumericalError  -> 4
"""

from constants import EXIT_CONFIG, EXIT_DATA, EXIT_NUMERICAL


class ARSimError(Exception):
    """Base class for all simulator errors."""

    exit_code = EXIT_NUMERICAL


class DomainError(ARSimError, ValueError):
    """An argument lies outside the physical domain of an operation."""


class PatternError(ARSimError):
    """A radiation pattern cannot support the requested operation."""


class NumericalError(ARSimError):
    """A computation produced a non-finite or degenerate result."""


class ConfigError(ARSimError):
    """Invalid run configuration."""

    exit_code = EXIT_CONFIG


class DataError(ARSimError):
    """Invalid or inconsistent input data."""

    exit_code = EXIT_DATA


class ParseError(DataError):
    """
    Malformed input file.

    Args:
        source: File name or description of the input
        line: 1-based line (or row) number, None when unknown
        message: What is wrong
    """

    def __init__(self, source, line, message):
        self.source = str(source)
        self.line = line
        self.message = message
        where = f"{self.source}:{line}" if line is not None else self.source
        super().__init__(f"{where}: {message}")


class GeometryError(DataError):
    """Scene geometry failed validation."""


class CorrectionLookupError(DataError, KeyError):
    """No correction entry for the requested (frequency, angle)."""

    def __str__(self):
        return str(self.args[0]) if self.args else "missing correction entry"
