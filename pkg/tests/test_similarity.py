from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from vcot.backends.profile import Embedding, EmbeddingKind
from vcot.backends.similarity import argmax_lowest_tie, cosine
from vcot.errors import InputError, UndefinedSimilarityError


def emb(*values: float) -> Embedding:
    return Embedding(vector=tuple(values), kind=EmbeddingKind.TEXT)


def test_identical_unit_vectors():
    assert cosine(emb(1.0, 0.0), emb(1.0, 0.0)) == 1.0


def test_orthogonal_vectors():
    assert cosine(emb(1.0, 0.0), emb(0.0, 1.0)) == 0.0


def test_forty_five_degrees():
    inv = 1.0 / math.sqrt(2.0)
    assert cosine(emb(1.0, 0.0), emb(inv, inv)) == pytest.approx(0.7071, abs=1e-4)
    assert abs(cosine(emb(1.0, 0.0), emb(inv, inv)) - inv) < 1e-9


def test_dimension_mismatch():
    with pytest.raises(UndefinedSimilarityError):
        cosine(emb(1.0), emb(1.0, 0.0))


def test_zero_vector_rejected_at_construction():
    with pytest.raises(InputError):
        emb(0.0, 0.0)


vectors = st.lists(
    st.floats(min_value=-10, max_value=10, allow_nan=False).filter(lambda x: abs(x) > 1e-6),
    min_size=2,
    max_size=8,
)


@given(a=vectors, b=vectors)
def test_symmetry_and_range(a, b):
    if len(a) != len(b):
        b = (b + a)[: len(a)]
    x, y = emb(*a), emb(*b)
    assert cosine(x, y) == cosine(y, x)
    assert -1.0 <= cosine(x, y) <= 1.0


def test_argmax_prefers_lowest_on_tie():
    assert argmax_lowest_tie([0.5, 0.5, 0.5]) == 0
    assert argmax_lowest_tie([0.1, 0.9, 0.9]) == 1
    assert argmax_lowest_tie([0.1, 0.2, 0.3]) == 2
