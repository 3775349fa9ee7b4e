"""Exception hierarchy shared by the library and the CLI."""

from typing import Optional


class TreeSieveError(Exception):
    """Base class for all errors raised by treesieve."""


class GraphFormatError(TreeSieveError, ValueError):
    """Malformed graph, coloring, vector or partition file."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidColoringError(TreeSieveError, ValueError):
    """A coloring does not satisfy its invariant on the given graph."""


class DegreeBoundError(TreeSieveError, ValueError):
    """The input graph exceeds the maximum degree an operation supports."""


class EnumerationGuardError(TreeSieveError):
    """An exhaustive routine was asked for an instance above its size guard."""
