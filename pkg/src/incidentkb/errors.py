"""Exception types shared across the package.

Every error raised by library code derives from IncidentKbError so callers
can catch one base class. The CLI maps these onto exit codes; the HTTP
service maps them onto status codes.
"""

from __future__ import annotations


class IncidentKbError(Exception):
    """Base class for all package errors."""


# --- input / document errors -------------------------------------------------

class MalformedDocument(IncidentKbError):
    """Document text is not a well-formed canonical record."""


class MissingRequiredField(IncidentKbError):
    """A required record field is absent or empty."""


class UnknownField(IncidentKbError):
    """A document carries a field outside the canonical set."""


class HeaderMismatch(IncidentKbError):
    """Delimited input header does not cover the configured field map."""


class EmptyInput(IncidentKbError):
    """An input that must be non-empty was empty."""


class KeyCollision(IncidentKbError):
    """Two records claim the same (source_dataset, source_row_id) key."""


class KeyMismatch(IncidentKbError):
    """Referenced record keys do not exist in the store."""


# --- provider errors ---------------------------------------------------------

class ProviderUnavailable(IncidentKbError):
    """Remote model endpoint unreachable or returned a hard failure."""


class UnparseableProviderOutput(IncidentKbError):
    """Model output could not be parsed even after one corrective retry."""


class MissingVerdict(IncidentKbError):
    """A record in the store has no classification verdict."""


class UnrecognizedLabel(IncidentKbError):
    """Verdict label is outside the transportation mode vocabulary."""


# --- retrieval / index errors ------------------------------------------------

class InvalidParams(IncidentKbError):
    """Out-of-range tuning parameter (alpha, k, chunk sizes, ...)."""


class EmptyCorpus(IncidentKbError):
    """Index construction was asked to run over zero chunks."""


class EmptyIndex(IncidentKbError):
    """A query was issued against an index with no content."""


class EmptyRetrieval(IncidentKbError):
    """No chunk scored above zero for the query."""


class DimensionMismatch(IncidentKbError):
    """Vector operands disagree on dimensionality."""


class UnknownChunk(IncidentKbError):
    """A chunk id is outside the indexed range."""


class ChunkExceedsBudget(IncidentKbError):
    """A single chunk is larger than the whole context token budget."""


# --- persistence errors ------------------------------------------------------

class StorageFailure(IncidentKbError):
    """Filesystem-level failure while reading or writing artifacts."""


class IncompatibleVersion(IncidentKbError):
    """Persisted index format version is not supported."""


class ChecksumMismatch(IncidentKbError):
    """Persisted index payload does not match its manifest checksum."""


# --- evaluation errors -------------------------------------------------------

class SystemFailure(IncidentKbError):
    """The system under evaluation raised while answering an item."""
