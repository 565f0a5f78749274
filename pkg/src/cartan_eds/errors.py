"""Exception hierarchy shared across the library.

The CLI maps MathError subclasses to exit code 1 and parse/usage
problems to exit code 2.
"""

from __future__ import annotations


class CartanEDSError(Exception):
    """Base class for all library errors."""


class MathError(CartanEDSError):
    """A computation is mathematically impossible on the given input."""


class ChartMismatchError(MathError):
    pass


class DegreeError(MathError):
    pass


class PoleError(MathError):
    """A denominator vanishes at a point of evaluation."""


class RankDeficiencyError(MathError):
    """Generators are generically dependent where independence is required."""


class RegularityError(MathError):
    """A regularity hypothesis fails identically (not just at special points)."""


class CancelledError(CartanEDSError):
    """A cooperative cancellation token was triggered."""


class ParseError(CartanEDSError):
    """Syntax or validation error in the text format, with a source position."""

    def __init__(self, message: str, line: int, column: int, expected: list[str] | None = None):
        self.line = line
        self.column = column
        self.expected = expected or []
        suffix = f" (expected: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{column}: {message}{suffix}")


class UsageError(CartanEDSError):
    """Bad command request: unknown names, missing flags, and similar."""
