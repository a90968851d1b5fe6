"""
Exception types shared by the Larmor clock modules.

The command-line entry point maps these onto process exit codes.
"""

from typing import Optional, Sequence


class LarmorClockError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class DomainError(LarmorClockError, ValueError):
    """An input lies outside the domain of the requested formula."""

    exit_code = 2


class SingularityError(DomainError):
    """The formula diverges at the requested point (e.g. E = V0 in the classical time)."""


class DegenerateMomentsError(DomainError):
    """Spin moments carry no usable signal (zero transmission, no precession)."""


class ConfigurationError(LarmorClockError):
    """Invalid settings, flags or engine/barrier combination."""

    exit_code = 2


class ParseError(LarmorClockError):
    """Malformed input file."""

    exit_code = 3

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalInstabilityError(LarmorClockError):
    """A non-finite value appeared while compounding transfer matrices."""

    exit_code = 4

    def __init__(self, message: str, segment: Optional[int] = None):
        self.segment = segment
        if segment is not None:
            message = f"segment {segment}: {message}"
        super().__init__(message)


class ConvergenceError(LarmorClockError):
    """Richardson extrapolation in the Larmor frequency did not settle."""

    exit_code = 4

    def __init__(self, message: str, sequence: Sequence = ()):
        self.sequence = list(sequence)
        super().__init__(f"{message} (estimates: {self.sequence})")
