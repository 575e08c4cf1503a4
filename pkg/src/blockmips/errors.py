"""Exception hierarchy shared across the package.

Three broad families: usage errors (bad arguments, raised as ValueError /
TypeError by the offending function), validation errors (well-formed calls
over malformed data), and format errors (corrupt or truncated files).
The CLI maps these onto distinct exit codes.
"""

from __future__ import annotations


class BlockMipsError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(BlockMipsError):
    """Data violates an invariant (bad coordinates, values, or shapes)."""


class FormatError(BlockMipsError):
    """A persisted file does not conform to its documented layout."""


class BadMagicError(FormatError):
    """File does not start with the expected magic bytes."""


class BadVersionError(FormatError):
    """File carries an unsupported format version."""


class TruncatedFileError(FormatError):
    """File ended before the declared payload was complete."""


class UnsortedCoordinatesError(ValidationError):
    """A vector's coordinates are not strictly increasing."""

    def __init__(self, doc_id: int, message: str | None = None):
        self.doc_id = doc_id
        super().__init__(message or f"vector {doc_id}: coordinates not strictly increasing")


class CoordinateOutOfRangeError(ValidationError):
    """A vector references a coordinate >= the collection dimensionality."""

    def __init__(self, doc_id: int, message: str | None = None):
        self.doc_id = doc_id
        super().__init__(message or f"vector {doc_id}: coordinate out of range")


class InvalidValueError(ValidationError):
    """A stored value is zero or non-finite."""

    def __init__(self, doc_id: int, message: str | None = None):
        self.doc_id = doc_id
        super().__init__(message or f"vector {doc_id}: zero or non-finite value")


class NegativeValueError(ValidationError):
    """A document vector carries a negative value."""

    def __init__(self, doc_id: int, message: str | None = None):
        self.doc_id = doc_id
        super().__init__(message or f"vector {doc_id}: negative value in document vector")


class IngestError(ValidationError):
    """A JSONL ingest line could not be parsed."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class GroundTruthFormatError(FormatError):
    """A ground-truth/results file violates its row contract."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")
