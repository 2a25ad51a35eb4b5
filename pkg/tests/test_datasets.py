from __future__ import annotations

import json

import pytest

from vcot.datasets import TextOnlySequence, parse_generic, parse_vist, parse_wikihow
from vcot.errors import IngestionError
from vcot.model import Sequence, TaskKind

from conftest import solid_png, write_vist_fixture


class TestParseVist:
    def test_two_story_fixture(self, tmp_path):
        path = write_vist_fixture(tmp_path / "data")
        sequences = parse_vist(path)
        assert len(sequences) == 2
        for seq in sequences:
            assert len(seq.elements) == 5
            assert seq.task is TaskKind.STORYTELLING
            assert all(p.visual is not None for p in seq.elements)

    def test_missing_image_names_path(self, tmp_path):
        path = tmp_path / "vist.json"
        path.write_text(
            json.dumps(
                [{"story_id": "s1", "steps": [{"text": "a", "image_path": "gone.png"}]}]
            ),
            encoding="utf-8",
        )
        with pytest.raises(IngestionError, match="gone.png"):
            parse_vist(path)

    def test_unreadable_png_names_story_and_step(self, tmp_path):
        (tmp_path / "bad.png").write_bytes(b"not a png at all")
        path = tmp_path / "vist.json"
        path.write_text(
            json.dumps(
                [{"story_id": "s1", "steps": [{"text": "a", "image_path": "bad.png"}]}]
            ),
            encoding="utf-8",
        )
        with pytest.raises(IngestionError, match=r"'s1' step 0"):
            parse_vist(path)

    def test_odd_step_count_kept_with_warning(self, tmp_path, caplog):
        (tmp_path / "img.png").write_bytes(solid_png((1, 1, 1)))
        path = tmp_path / "vist.json"
        path.write_text(
            json.dumps(
                [
                    {
                        "story_id": "short",
                        "steps": [
                            {"text": "only one", "image_path": "img.png"},
                            {"text": "and two", "image_path": "img.png"},
                        ],
                    }
                ]
            ),
            encoding="utf-8",
        )
        with caplog.at_level("WARNING"):
            sequences = parse_vist(path)
        assert len(sequences) == 1
        assert len(sequences[0].elements) == 2
        assert any("short" in message for message in caplog.messages)

    def test_empty_array_yields_nothing(self, tmp_path):
        path = tmp_path / "vist.json"
        path.write_text("[]", encoding="utf-8")
        assert parse_vist(path) == []


class TestParseWikihow:
    def test_article_with_six_steps(self, tmp_path):
        path = tmp_path / "wh.json"
        path.write_text(
            json.dumps([{"title": "How to X", "steps": [f"s{i}" for i in range(6)]}]),
            encoding="utf-8",
        )
        [seq] = parse_wikihow(path)
        assert isinstance(seq, TextOnlySequence)
        assert len(seq.texts) == 6
        assert seq.task is TaskKind.SUMMARIZATION
        assert seq.title == "How to X"

    def test_empty_steps_skipped_with_warning(self, tmp_path, caplog):
        path = tmp_path / "wh.json"
        path.write_text(
            json.dumps(
                [
                    {"title": "Empty", "steps": []},
                    {"title": "Fine", "steps": ["one step"]},
                ]
            ),
            encoding="utf-8",
        )
        with caplog.at_level("WARNING"):
            sequences = parse_wikihow(path)
        assert [s.title for s in sequences] == ["Fine"]
        assert any("Empty" in message for message in caplog.messages)

    def test_missing_title_is_an_error(self, tmp_path):
        path = tmp_path / "wh.json"
        path.write_text(json.dumps([{"steps": ["a"]}]), encoding="utf-8")
        with pytest.raises(IngestionError):
            parse_wikihow(path)


class TestParseGeneric:
    def test_mixed_modalities(self, tmp_path):
        (tmp_path / "img.png").write_bytes(solid_png((5, 5, 5)))
        path = tmp_path / "generic.json"
        path.write_text(
            json.dumps(
                [
                    {
                        "id": "with-images",
                        "task": "storytelling",
                        "steps": [
                            {"text": "a", "image_path": "img.png"},
                            {"text": "b", "image_path": "img.png"},
                        ],
                    },
                    {"id": "text-only", "steps": [{"text": "a"}, {"text": "b"}]},
                ]
            ),
            encoding="utf-8",
        )
        full, text_only = parse_generic(path)
        assert isinstance(full, Sequence)
        assert full.task is TaskKind.STORYTELLING
        assert isinstance(text_only, TextOnlySequence)
        assert text_only.task is TaskKind.GENERIC
