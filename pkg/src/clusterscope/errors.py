"""Exception types shared across the engine.

Every error carries a machine-readable payload so the HTTP layer and the
CLI can surface the same structured information (e.g. a parser offset).
"""

from __future__ import annotations

from typing import Any


class EngineError(Exception):
    """Base class for all engine errors."""

    def payload(self) -> dict[str, Any]:
        return {"error": type(self).__name__, "message": str(self)}


class DataFormatError(EngineError):
    """Structurally invalid input data (ragged CSV, empty input, bad names)."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line

    def payload(self) -> dict[str, Any]:
        out = super().payload()
        if self.line is not None:
            out["line"] = self.line
        return out


class UnknownFeatureError(EngineError):
    """A referenced feature name does not exist in the table."""

    def __init__(self, names: list[str]):
        super().__init__(f"unknown feature(s): {', '.join(names)}")
        self.names = names

    def payload(self) -> dict[str, Any]:
        return {**super().payload(), "names": self.names}


class FilterSyntaxError(EngineError):
    """Filter expression failed to parse.

    ``offset`` is the byte offset of the failure; ``expected`` lists the
    token kinds that would have been accepted there.
    """

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        super().__init__(message)
        self.offset = offset
        self.expected = tuple(expected)

    def payload(self) -> dict[str, Any]:
        return {
            **super().payload(),
            "offset": self.offset,
            "expected": list(self.expected),
        }


class FilterTypeError(EngineError):
    """Filter expression applied an operator to an incompatible value."""


class ParameterError(EngineError):
    """A fit parameter is out of its valid range (k > n, bad linkage, ...)."""


class ValidationError(EngineError):
    """Input data violates an operation's precondition (shape, symmetry, ...)."""


class DegenerateInputError(EngineError):
    """Input is degenerate for the requested computation (zero-norm row, ...)."""


class InsufficientDataError(EngineError):
    """Too few rows/features for the requested fit."""
