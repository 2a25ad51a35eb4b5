from __future__ import annotations

import io
import json

import pytest
from PIL import Image

from vcot.backends import BackendProfile, MockModelService, ModelGateway, ResponseCache
from vcot.model import SourceKind, Sequence, TaskKind, TextVisualPair, VisualAsset


def solid_png(color: tuple[int, int, int], size: int = 16) -> bytes:
    buf = io.BytesIO()
    Image.new("RGB", (size, size), color).save(buf, format="PNG")
    return buf.getvalue()


def dataset_asset(color: tuple[int, int, int] = (10, 20, 30)) -> VisualAsset:
    return VisualAsset.from_png(solid_png(color), SourceKind.DATASET)


def make_pair(text: str, color: tuple[int, int, int] = (10, 20, 30)) -> TextVisualPair:
    return TextVisualPair(text=text, visual=dataset_asset(color))


def make_sequence(texts: list[str], task: TaskKind = TaskKind.STORYTELLING, id: str = "seq-1") -> Sequence:
    pairs = tuple(make_pair(t, (i * 7 % 256, i * 13 % 256, i * 29 % 256)) for i, t in enumerate(texts))
    return Sequence(id=id, task=task, elements=pairs)


@pytest.fixture
def mock_service() -> MockModelService:
    return MockModelService()


@pytest.fixture
def mock_gateway(mock_service) -> ModelGateway:
    return ModelGateway(BackendProfile.mock(), service=mock_service)


@pytest.fixture
def cached_gateway(tmp_path, mock_service) -> ModelGateway:
    cache = ResponseCache(tmp_path / "cache")
    return ModelGateway(BackendProfile.mock(), service=mock_service, cache=cache)


def write_vist_fixture(root, stories: int = 2, steps: int = 5) -> "Path":
    """A small storytelling dataset: JSON index plus PNG files on disk."""
    root.mkdir(parents=True, exist_ok=True)
    payload = []
    for s in range(stories):
        steps_payload = []
        for i in range(steps):
            name = f"img_{s}_{i}.png"
            (root / name).write_bytes(solid_png((40 * s + 10, 30 * i + 5, 90)))
            steps_payload.append(
                {"text": f"story {s} step {i} something happens", "image_path": name}
            )
        payload.append({"story_id": f"story-{s}", "steps": steps_payload})
    path = root / "vist.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def write_wikihow_fixture(root, articles: int = 1, steps: int = 4) -> "Path":
    root.mkdir(parents=True, exist_ok=True)
    payload = [
        {
            "title": f"How to do thing {a}",
            "steps": [f"article {a} do step {i} carefully" for i in range(steps)],
        }
        for a in range(articles)
    ]
    path = root / "wikihow.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path
