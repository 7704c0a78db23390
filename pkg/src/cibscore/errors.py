"""Exception types shared across the scoring pipeline.

Every error raised while reading user-supplied files carries the offending
file path and, when known, the 1-based line of the bad row, so messages can
always point at a concrete location.
"""

from __future__ import annotations

from pathlib import Path


class CibscoreError(Exception):
    """Base class for all pipeline errors."""

    def __init__(self, message: str, *, source: str | Path | None = None,
                 row: int | None = None):
        self.message = message
        self.source = str(source) if source is not None else None
        self.row = row
        super().__init__(message)

    def __str__(self) -> str:
        if self.source is not None and self.row is not None:
            return f"{self.source}:{self.row}: {self.message}"
        if self.source is not None:
            return f"{self.source}: {self.message}"
        if self.row is not None:
            return f"row {self.row}: {self.message}"
        return self.message


class SchemaError(CibscoreError):
    """A required column or key is missing, or an unknown one is present."""


class ParseError(CibscoreError):
    """A file or cell could not be decoded into its expected type."""


class ValidationError(CibscoreError):
    """A decoded value violates a documented invariant or valid range."""


class NoEvidenceError(CibscoreError):
    """A stream holds no usable samples for the requested concept."""


class EvaluationError(CibscoreError):
    """Agreement evaluation inputs do not overlap or cannot be compared."""
