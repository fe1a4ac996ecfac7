from __future__ import annotations


class SearchError(Exception):
    """Base class for every error raised by the search toolkit."""


class UsageError(SearchError):
    """Malformed command-line text (marked-set spec, grid spec, iteration spec)."""


class SizeError(SearchError):
    """A register, circuit width or iteration count is outside the supported range."""


class ShapeError(SearchError):
    """Mismatched register sizes, or a state without the three-amplitude structure."""


class DomainError(SearchError):
    """An argument lies outside the mathematical domain of the operation."""


class InvariantError(SearchError):
    """An internal consistency check failed. Always a bug, never user error."""
