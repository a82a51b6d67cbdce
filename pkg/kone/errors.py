"""Exceptions raised by kone."""
from typing import Any, Dict, Optional

__all__ = [
    "ConfigError",
    "EmptySampleError",
    "IntegrationError",
    "InvalidMeasureError",
    "KoneError",
    "NonFiniteStateError",
    "SupportError",
]


class KoneError(Exception):
    """Base class of all kone errors."""


class InvalidMeasureError(KoneError, ValueError):
    """A discrete measure or configuration violates its invariants."""


class IntegrationError(KoneError, RuntimeError):
    """Numerical quadrature failed to reach the requested tolerance."""


class SupportError(KoneError, ValueError):
    """A functional is not supported where the verifier needs it to be."""


class EmptySampleError(KoneError, ValueError):
    """An estimator received no samples."""


class NonFiniteStateError(KoneError, RuntimeError):
    """An energy or a simulation state became non-finite.

    The offending state is kept in ``dump`` so callers can write it out.
    """

    def __init__(self, message: str, dump: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.dump = dump if dump is not None else {}


class ConfigError(KoneError, ValueError):
    """A run configuration could not be parsed or validated.

    Parameters
    ----------
    message : str
        Description of the problem.
    field : str, optional
        ``section.key`` of the offending entry.
    line : int, optional
        Line number in the configuration file.
    """

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        line: Optional[int] = None,
    ):
        location = []
        if field is not None:
            location.append(f"field {field}")
        if line is not None:
            location.append(f"line {line}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.field = field
        self.line = line
