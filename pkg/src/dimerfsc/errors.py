"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class DimerError(Exception):
    """Base class for every error raised by this package."""


class DomainError(DimerError, ValueError):
    """Arguments outside an operation's mathematical domain."""


class BudgetError(DimerError):
    """Requested size exceeds a configured enumeration or dense-matrix budget."""


class PrecisionError(DimerError):
    """Working precision is too low to resolve the requested quantity."""


class AccuracyError(DimerError):
    """A numerical routine could not reach its requested accuracy."""
