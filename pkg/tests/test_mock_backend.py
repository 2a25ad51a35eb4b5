from __future__ import annotations

import hashlib
import io
import math
import re

import pytest
from PIL import Image

from vcot.backends.mock import MOCK_EMBED_DIM, bag_of_words_vector
from vcot.errors import InputError
from vcot.model import SourceKind, VisualAsset

from conftest import dataset_asset


def oracle_bag(text: str) -> list[float]:
    """Independent bag-of-words reimplementation used to check the mock."""

    def fnv(token: str) -> int:
        h = 2166136261
        for b in token.encode("utf-8"):
            h = ((h ^ b) * 16777619) % 2**32
        return h

    vec = [0.0] * 64
    for token in re.split(r"[^0-9a-z]+", text.lower()):
        if token:
            vec[fnv(token) % 64] += 1.0
    norm = math.sqrt(sum(x * x for x in vec))
    return [x / norm for x in vec]


class TestGenerate:
    def test_temp_zero_single_candidate(self, mock_gateway):
        prompt = "P"
        out = mock_gateway.generate_text(prompt, temperature=0.0, n=1)
        h8 = hashlib.sha256(prompt.encode()).hexdigest()[:8]
        assert out[0].text == f"GEN({h8},0.00,0)"
        assert out[0].candidate_index == 0
        assert out[0].token_logprobs is None

    def test_five_candidates_distinct(self, mock_gateway):
        out = mock_gateway.generate_text("anything goes", temperature=0.5, n=5)
        texts = [g.text for g in out]
        assert len(set(texts)) == 5
        assert [g.candidate_index for g in out] == list(range(5))

    def test_logprobs_follow_position_series(self, mock_gateway):
        out = mock_gateway.generate_text("x", temperature=0.5, n=3, want_logprobs=True)
        for k, gen in enumerate(out):
            count = len(gen.text.split())
            assert count == k + 1
            assert list(gen.token_logprobs) == [-0.1 * (j + 1) for j in range(count)]
        # hand-checkable sum for candidate 2: -0.1 - 0.2 - 0.3
        assert sum(out[2].token_logprobs) == pytest.approx(-0.6)

    def test_rejects_zero_candidates(self, mock_gateway):
        with pytest.raises(InputError):
            mock_gateway.generate_text("p", temperature=0.0, n=0)

    def test_rejects_negative_temperature(self, mock_gateway):
        with pytest.raises(InputError):
            mock_gateway.generate_text("p", temperature=-0.1, n=1)


class TestGenerateImage:
    def test_color_matches_recomputed_hash(self, mock_gateway):
        prompt = "a quiet harbor"
        assets = mock_gateway.generate_image(prompt, n=4, seed=7)
        assert len(assets) == 4
        for k, asset in enumerate(assets):
            digest = hashlib.sha256(prompt.encode() + str(k).encode()).digest()
            img = Image.open(io.BytesIO(asset.png_bytes))
            assert img.size == (16, 16)
            assert img.getpixel((0, 0)) == (digest[0], digest[1], digest[2])
            assert asset.source is SourceKind.GENERATED
            assert asset.prompt == prompt

    def test_deterministic_bytes(self, mock_gateway):
        a = mock_gateway.generate_image("same", n=2, seed=3)
        b = mock_gateway.generate_image("same", n=2, seed=3)
        assert [x.png_bytes for x in a] == [y.png_bytes for y in b]

    def test_rejects_zero(self, mock_gateway):
        with pytest.raises(InputError):
            mock_gateway.generate_image("p", n=0)


class TestCaption:
    def test_generated_asset_captions_its_prompt(self, mock_gateway):
        asset = mock_gateway.generate_image("a red barn", n=1)[0]
        assert mock_gateway.caption_image(asset) == "a picture of a red barn"

    def test_dataset_asset_captions_id_prefix(self, mock_gateway):
        asset = dataset_asset()
        assert mock_gateway.caption_image(asset) == f"a picture of {asset.id[:8]}"

    def test_zero_byte_asset_rejected(self, mock_gateway):
        broken = object.__new__(VisualAsset)
        object.__setattr__(broken, "id", "0" * 64)
        object.__setattr__(broken, "png_bytes", b"")
        object.__setattr__(broken, "source", SourceKind.DATASET)
        object.__setattr__(broken, "prompt", None)
        with pytest.raises(InputError):
            mock_gateway.caption_image(broken)


class TestEmbed:
    def test_matches_independent_oracle(self, mock_gateway):
        text = "Mix the BATTER, then rest 10 minutes"
        vec = mock_gateway.embed([("text", text)])[0].vector
        assert list(vec) == pytest.approx(oracle_bag(text), abs=1e-12)

    def test_identical_strings_identical_vectors(self, mock_gateway):
        a, b = mock_gateway.embed([("text", "same words"), ("text", "same words")])
        assert a.vector == b.vector

    def test_order_free(self, mock_gateway):
        a, b = mock_gateway.embed([("text", "a b"), ("text", "b a")])
        assert a.vector == b.vector

    def test_image_embeds_its_prompt(self, mock_gateway):
        from vcot.backends.similarity import cosine

        asset = mock_gateway.generate_image("a busy market", n=1)[0]
        img_emb, txt_emb = mock_gateway.embed([("image", asset), ("text", "a busy market")])
        assert cosine(img_emb, txt_emb) == pytest.approx(1.0, abs=1e-12)

    def test_dataset_image_embeds_content_hash(self, mock_gateway):
        asset = dataset_asset((9, 9, 9))
        img_emb = mock_gateway.embed([("image", asset)])[0]
        assert list(img_emb.vector) == pytest.approx(oracle_bag(asset.id), abs=1e-12)

    def test_unit_norm_and_dim(self, mock_gateway):
        vecs = mock_gateway.embed([("text", "one two three"), ("text", "four")])
        for emb in vecs:
            assert emb.dim == MOCK_EMBED_DIM
            assert math.sqrt(sum(x * x for x in emb.vector)) == pytest.approx(1.0, abs=1e-9)

    def test_empty_token_bag_rejected(self):
        with pytest.raises(InputError):
            bag_of_words_vector("!!! ---")


class TestCallCounter:
    def test_counts_per_endpoint(self, mock_service, mock_gateway):
        mock_gateway.generate_text("p", temperature=0.0, n=1)
        mock_gateway.generate_image("p", n=1)
        mock_gateway.embed([("text", "p")])
        assert mock_service.calls["generate"] == 1
        assert mock_service.calls["image"] == 1
        assert mock_service.calls["embed"] == 1
        assert mock_service.total_calls == 3
