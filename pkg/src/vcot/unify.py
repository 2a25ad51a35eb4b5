"""Task unification: give text-only sequences a consistent visual per step.

Each step's candidate visuals are generated from its own text and scored by
embedding similarity against the *surrounding* input texts; the most
consistent candidate wins. Sequences that already carry visuals pass
through untouched upstream and never reach this module.
"""

from __future__ import annotations

from typing import Literal

from .backends.gateway import ModelGateway
from .backends.similarity import argmax_lowest_tie, cosine
from .errors import InputError
from .model import Sequence, TaskKind, TextVisualPair

NeighborAggregate = Literal["mean", "min"]


def neighbor_indices(i: int, n: int) -> list[int]:
    """Existing neighbors of position i; singletons fall back to i itself."""
    if n == 1:
        return [i]
    return [j for j in (i - 1, i + 1) if 0 <= j < n]


def unify_text_sequence(
    texts: list[str],
    k: int,
    gateway: ModelGateway,
    seed: int = 0,
    *,
    sequence_id: str = "unified",
    task: TaskKind = TaskKind.GENERIC,
    title: str | None = None,
    aggregate: NeighborAggregate = "mean",
) -> Sequence:
    """Build a text-visual Sequence by selecting one of k candidate visuals
    per input text.

    Candidate c of step i is scored by the mean (or min) cosine between
    embed(c) and embed(t_j) over the existing neighbor texts j in
    {i-1, i+1}; ties break to the lowest candidate index.
    """
    if not texts:
        raise InputError("cannot unify an empty text list")
    if any(not t.strip() for t in texts):
        raise InputError("unification input contains an empty text")
    if k < 1:
        raise InputError("candidate count k must be >= 1")

    text_embeddings = gateway.embed([("text", t) for t in texts])
    pairs: list[TextVisualPair] = []
    for i, text in enumerate(texts):
        candidates = gateway.generate_image(text, n=k, seed=seed)
        candidate_embeddings = gateway.embed([("image", c) for c in candidates])
        anchors = [text_embeddings[j] for j in neighbor_indices(i, len(texts))]
        scores = []
        for emb in candidate_embeddings:
            sims = [cosine(emb, anchor) for anchor in anchors]
            scores.append(sum(sims) / len(sims) if aggregate == "mean" else min(sims))
        winner = argmax_lowest_tie(scores)
        pairs.append(TextVisualPair(text=text, visual=candidates[winner]))

    return Sequence(id=sequence_id, task=task, elements=tuple(pairs), title=title)
