"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class VcotError(Exception):
    """Base class for all pipeline errors."""


class InputError(VcotError):
    """Caller-supplied data violates a documented precondition."""


class StructuralError(VcotError):
    """Sequence/tree bookkeeping received inconsistent shapes."""


class BackendUnavailableError(VcotError):
    """Transport to a model endpoint kept failing after all retries."""


class ProtocolError(VcotError):
    """A backend answered, but the response violates the wire contract."""


class UndefinedSimilarityError(VcotError):
    """Cosine similarity was requested for a zero or mismatched vector."""


class GenerationError(VcotError):
    """A model produced unusable output (e.g. every candidate empty)."""


class DegenerateFoveationError(GenerationError):
    """Focus extraction came back empty; callers may retry at temperature 0.5."""


class InfillingError(VcotError):
    """A gap could not be infilled; carries the failing gap index."""

    def __init__(self, gap_index: int, message: str):
        super().__init__(f"gap {gap_index}: {message}")
        self.gap_index = gap_index


class IngestionError(VcotError):
    """A dataset file could not be parsed or an asset could not be loaded."""


class EmptySliceError(VcotError):
    """Tabulation was asked to summarize a slice with no matching records."""
