"""Exception types shared across the package."""
from __future__ import annotations


class SlalomError(Exception):
    """Base class for all package errors."""


class DomainError(SlalomError):
    """Numeric state broke an invariant (non-finite or out-of-range values)."""


class ConfigError(SlalomError):
    """Invalid configuration or policy data; the message names the offending field."""


class StateError(SlalomError):
    """Operation applied to a game or session in the wrong lifecycle state."""


class LogFormatError(SlalomError):
    """Session log could not be parsed."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class UnsupportedVersionError(LogFormatError):
    """Log or policy format version this build does not understand."""

    def __init__(self, found: object, supported: int):
        super().__init__(f"format version {found!r} not supported (this build reads version {supported})")
        self.found = found
        self.supported = supported


class UncalibratedError(SlalomError):
    """Behavioural experiment requested with a configuration that was never calibrated."""


class ProtocolError(SlalomError):
    """Malformed or out-of-role wire message; the message names the offending field."""
