"""Cosine similarity over gateway embeddings."""

from __future__ import annotations

import math

from ..errors import UndefinedSimilarityError
from .profile import Embedding


def cosine(a: Embedding, b: Embedding) -> float:
    """Cosine of the angle between two embeddings, clamped into [-1, 1].

    Symmetric by construction: the products and their summation order are
    identical either way round.
    """
    if a.dim != b.dim:
        raise UndefinedSimilarityError(f"dimension mismatch: {a.dim} vs {b.dim}")
    dot = 0.0
    norm_a = 0.0
    norm_b = 0.0
    for x, y in zip(a.vector, b.vector):
        dot += x * y
        norm_a += x * x
        norm_b += y * y
    if norm_a == 0.0 or norm_b == 0.0:
        raise UndefinedSimilarityError("cosine of a zero vector is undefined")
    value = dot / (math.sqrt(norm_a) * math.sqrt(norm_b))
    return max(-1.0, min(1.0, value))


def argmax_lowest_tie(scores: list[float]) -> int:
    """Index of the largest score; exact ties resolve to the lowest index."""
    if not scores:
        raise UndefinedSimilarityError("argmax of an empty score list")
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best
