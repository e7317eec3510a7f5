"""Exception types shared across the package."""

from __future__ import annotations


class QergoError(Exception):
    """Base class for errors raised by this package."""


class InvariantViolation(QergoError):
    """A structural invariant (coverage, disjointness, measure, norm) failed.

    Raised by the audit helpers and by the scenario runner when a computed
    object is internally inconsistent, as opposed to a caller passing bad
    arguments (which raises ValueError).
    """


class ConfigError(QergoError):
    """A scenario file could not be parsed or validated."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")
