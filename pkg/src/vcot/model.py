"""Core domain types: text-visual sequences, infilling nodes, and merge bookkeeping.

Everything here is an in-memory value type. Construction validates invariants;
after that, instances are treated as immutable and may be shared freely between
threads. The one deliberate exception is ``TextVisualPair.caption``, a
write-once memo slot filled the first time a captioner sees the pair.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field
from enum import Enum

from PIL import Image, UnidentifiedImageError

from .errors import InputError, StructuralError


class SourceKind(str, Enum):
    DATASET = "dataset"
    GENERATED = "generated"


class TaskKind(str, Enum):
    STORYTELLING = "storytelling"
    SUMMARIZATION = "summarization"
    GENERIC = "generic"


class HaltingMode(str, Enum):
    """Recursion stopping policy. Fixed depth is the only shipped mode; the
    enum is the extension seam for smarter halting strategies."""

    FIXED_DEPTH = "fixed_depth"


def content_hash(data: bytes) -> str:
    """Lowercase hex SHA-256 used as the identity of binary assets."""
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class VisualAsset:
    """A PNG image, content-addressed by the SHA-256 of its bytes.

    Build instances through :meth:`from_png`, which checks the bytes decode
    as PNG and derives ``id``. Generated assets must record the prompt that
    produced them.
    """

    id: str
    png_bytes: bytes = field(repr=False)
    source: SourceKind
    prompt: str | None = None

    @classmethod
    def from_png(
        cls, png_bytes: bytes, source: SourceKind, prompt: str | None = None
    ) -> "VisualAsset":
        if not png_bytes:
            raise InputError("visual asset has no bytes")
        try:
            with Image.open(io.BytesIO(png_bytes)) as img:
                if img.format != "PNG":
                    raise InputError(f"expected PNG bytes, got {img.format}")
                img.verify()
        except UnidentifiedImageError as exc:
            raise InputError("bytes do not decode as an image") from exc
        if source is SourceKind.GENERATED and prompt is None:
            raise InputError("generated assets must record their prompt")
        return cls(
            id=content_hash(png_bytes),
            png_bytes=png_bytes,
            source=source,
            prompt=prompt,
        )


@dataclass(eq=True)
class TextVisualPair:
    """One sequence element: text, its visual, and a memoized caption.

    Original dataset elements and selected infillings carry both modalities.
    Text-only and image-only baselines relax that to a single modality, so
    both fields are optional with at least one required. ``caption`` starts
    unset and is filled once, the first time the pair is projected to text.
    """

    text: str | None
    visual: VisualAsset | None
    caption: str | None = None

    def __post_init__(self) -> None:
        if self.text is None and self.visual is None:
            raise InputError("pair needs at least one modality")
        if self.text is not None and not self.text.strip():
            raise InputError("pair text is empty")


@dataclass(frozen=True)
class Sequence:
    """An ordered text-visual sequence. Element order is never reordered by
    any transformation downstream."""

    id: str
    task: TaskKind
    elements: tuple[TextVisualPair, ...]
    title: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise InputError("sequence id is empty")
        if len(self.elements) < 1:
            raise InputError(f"sequence {self.id!r} has no elements")

    @property
    def gap_count(self) -> int:
        return max(0, len(self.elements) - 1)


@dataclass(frozen=True)
class Foveation:
    """Global focus string plus the summary it was extracted from."""

    focus: str
    summary: str
    summary_loglik: float

    def __post_init__(self) -> None:
        if not self.focus.strip():
            raise InputError("foveation focus is empty")
        if not (self.summary_loglik <= 0.0):  # also rejects NaN
            raise InputError("summary log-likelihood must be finite and <= 0")


@dataclass(frozen=True)
class RecursionPolicy:
    """How deep gaps are filled. Each gap receives 2**depth_limit - 1 nodes."""

    depth_limit: int = 2
    halting: HaltingMode = HaltingMode.FIXED_DEPTH

    def __post_init__(self) -> None:
        if self.depth_limit < 1:
            raise InputError("depth_limit must be >= 1")

    def nodes_per_gap(self) -> int:
        return 2**self.depth_limit - 1


@dataclass(frozen=True)
class InfillingNode:
    """A generated pair annotated with where and how it was selected.

    ``text_score``/``visual_score`` are the winning candidates' similarity
    scores; baselines that skip selection leave them (and the audit fields)
    unset. ``text_scores``/``visual_scores`` keep every candidate's score so
    a run can be re-verified after the fact.
    """

    pair: TextVisualPair
    depth: int
    gap_index: int
    text_score: float | None
    visual_score: float | None
    candidate_index_text: int | None
    candidate_index_visual: int | None
    # Audit trail, populated by the engine, absent on baseline nodes.
    novelty_proxy: float | None = None
    text_prompt_sha256: str | None = None
    image_prompt_sha256: str | None = None
    text_scores: tuple[float, ...] | None = None
    visual_scores: tuple[float, ...] | None = None
    candidate_texts: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise InputError("node depth must be >= 1")
        if self.gap_index < 0:
            raise InputError("gap_index must be >= 0")
        for name in ("text_score", "visual_score"):
            value = getattr(self, name)
            if value is not None and not -1.0 <= value <= 1.0:
                raise InputError(f"{name} {value} outside [-1, 1]")


@dataclass(frozen=True)
class MergedEntry:
    """One slot of a merged sequence: an original pair or an infilling."""

    pair: TextVisualPair
    node: InfillingNode | None = None

    @property
    def kind(self) -> str:
        return "infilled" if self.node is not None else "original"


@dataclass(frozen=True)
class AugmentedSequence:
    """Original elements interleaved, in order, with their gap infillings."""

    original: Sequence
    infillings: tuple[InfillingNode, ...]
    merged: tuple[MergedEntry, ...]

    @classmethod
    def passthrough(cls, seq: Sequence) -> "AugmentedSequence":
        """The no-infilling augmentation: merged equals the input."""
        return cls(
            original=seq,
            infillings=(),
            merged=tuple(MergedEntry(pair=p) for p in seq.elements),
        )

    def originals_in_merged(self) -> tuple[TextVisualPair, ...]:
        return tuple(e.pair for e in self.merged if e.node is None)


def merge_gap_results(
    original: Sequence, per_gap: list[list[InfillingNode]]
) -> AugmentedSequence:
    """Splice per-gap infilling lists between the original elements.

    ``per_gap[i]`` holds gap i's nodes in recursion in-order arrangement and
    must have exactly one entry per gap (n-1 for an n-element sequence).
    """
    n = len(original.elements)
    if len(per_gap) != original.gap_count:
        raise StructuralError(
            f"expected {original.gap_count} gap lists for {n} elements, "
            f"got {len(per_gap)}"
        )
    merged: list[MergedEntry] = []
    infillings: list[InfillingNode] = []
    for i, element in enumerate(original.elements):
        merged.append(MergedEntry(pair=element))
        if i < original.gap_count:
            for node in per_gap[i]:
                if node.gap_index != i:
                    raise StructuralError(
                        f"node tagged gap {node.gap_index} found in gap {i}"
                    )
                merged.append(MergedEntry(pair=node.pair, node=node))
                infillings.append(node)
    return AugmentedSequence(
        original=original, infillings=tuple(infillings), merged=tuple(merged)
    )


def inorder_depths(depth_limit: int, depth: int = 1) -> list[int]:
    """Depth labels of one gap's nodes in output order, for a full recursion.

    Mirrors the engine's divide step: the midpoint at ``depth`` flanked by
    the two half-gap expansions at ``depth + 1``.
    """
    if depth > depth_limit:
        return []
    child = inorder_depths(depth_limit, depth + 1)
    return child + [depth] + child
