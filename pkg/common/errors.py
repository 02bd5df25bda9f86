# Error types
"""Exception hierarchy shared by the toolkit modules."""

from typing import Optional


class SymtopError(Exception):
    """Base class for every error raised by the toolkit."""


class RangeError(SymtopError, ValueError):
    """A quantum number, index or parameter lies outside its admissible range."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DomainError(SymtopError, ValueError):
    """A closed-form expression was evaluated outside its validity domain."""


class DipoleError(SymtopError, ValueError):
    """The dipole is zero or does not belong to the required class."""


class ClassificationError(SymtopError):
    """Exact resonance classification was requested in rational-ratio mode."""


class ClosureError(SymtopError):
    """Invalid generators or an inconsistent ideal request."""


class ConfigError(SymtopError, ValueError):
    """Experiment configuration could not be parsed or validated."""

    def __init__(self, field: str, message: str, line: Optional[int] = None):
        self.field = field
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{field}{where}: {message}")
