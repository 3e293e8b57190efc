"""Exception types shared across the engine.

The service layer maps these onto HTTP status codes; the CLI maps them
onto exit codes. Everything raised on purpose inside the engine derives
from EngineError so callers can catch one base class.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for every deliberate engine failure."""


class ValidationError(EngineError):
    """Bad input that the caller could have checked (HTTP 400 / exit 2)."""


class CsvParseError(ValidationError):
    """Malformed CSV. Carries 1-based row and column positions when known."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyInputError(ValidationError):
    """A document with no data rows or no columns."""


class UnknownFeatureError(ValidationError):
    """A feature name that does not exist in the table."""


class EmptyFeatureError(ValidationError):
    """Every feature deselected or weighted to zero: nothing to cluster on."""


class EmptyCellError(ValidationError):
    """Similarity click landed on a missing cell."""


class UnknownTargetError(ValidationError):
    """An item id or cluster id that does not exist."""


class InfeasibleError(EngineError):
    """A request that is structurally impossible (HTTP 422)."""


class InfeasibleKError(InfeasibleError):
    """Cluster count outside what the data supports."""


class TooSmallClusterError(InfeasibleError):
    """Sub-clustering needs at least 4 members."""


class UndefinedMetricError(InfeasibleError):
    """Metric undefined for this partition (e.g. fewer than 2 clusters)."""


class NoLabelsError(InfeasibleError):
    """Re-ranking requested against an empty working layout."""


class EmptySpaceError(InfeasibleError):
    """Every candidate in the model space failed; carries the reasons."""

    def __init__(self, failures: dict[str, str]):
        super().__init__(f"all {len(failures)} candidates failed")
        self.failures = failures


class NumericFailureError(EngineError):
    """Numerical routine did not converge (HTTP 500 / exit 3)."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class StaleGenerationError(EngineError):
    """An op was submitted against an out-of-date layout generation (HTTP 409)."""
