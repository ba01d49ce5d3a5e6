"""Exception taxonomy.

Two top-level families matter for the CLI exit codes: ``DataError`` (exit 3)
covers everything wrong with inputs — malformed documents, dangling
references, incompatible index files, protocol violations — and
``NumericError`` (exit 4) covers non-finite values produced during
computation.
"""


class GragError(Exception):
    """Base class for all errors raised by this package."""


class DataError(GragError):
    """Invalid or inconsistent input data."""


class DocumentError(DataError):
    """Malformed graph document (bad JSON, bad CSV row, bad field)."""


class ReferentialError(DataError):
    """An edge references a node id that does not exist."""


class NotFoundError(DataError):
    """A requested node id is not present in the graph or subgraph."""


class DimensionError(DataError):
    """Vector or matrix dimensions do not agree."""


class DisconnectedError(DataError):
    """A subgraph is not connected from the requested root."""


class IndexFormatError(DataError):
    """Index file is malformed or truncated."""


class IndexVersionError(IndexFormatError):
    """Index file magic or format version is not supported."""


class FingerprintError(DataError):
    """Index fingerprint does not match the graph it is used with."""


class DescriptionParseError(DataError):
    """Hierarchical description text violates the grammar."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class WeightFormatError(DataError):
    """Weight file is malformed or has inconsistent shapes."""


class TransportError(DataError):
    """Remote embedding endpoint unreachable after retries."""


class ProtocolError(DataError):
    """Remote embedding endpoint violated the wire protocol."""


class NumericError(GragError):
    """A computation produced a non-finite value."""
