"""Exception hierarchy shared by all pipeline stages."""

from __future__ import annotations


class DLPError(Exception):
    """Base class for every error raised by this package."""


class IngestError(DLPError, ValueError):
    """A rejected input row. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.message = message
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class MalformedRow(IngestError):
    pass


class NegativeDuration(IngestError):
    pass


class EmptyUserId(IngestError):
    pass


class EmptyInput(DLPError, ValueError):
    pass


class LengthMismatch(DLPError, ValueError):
    pass


class InsufficientData(DLPError, ValueError):
    pass


class SingularSystem(DLPError, ArithmeticError):
    pass


class InvalidBand(DLPError, ValueError):
    pass


class InvalidThresholds(DLPError, ValueError):
    pass


class InvalidConfig(DLPError, ValueError):
    pass


class StoreError(DLPError):
    pass


class NotFound(StoreError, LookupError):
    pass


class SchemaVersionMismatch(StoreError):
    pass


class CorruptFile(StoreError):
    pass


class StoreLocked(StoreError):
    """Another process holds the store's advisory lock."""
