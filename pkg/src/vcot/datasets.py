"""Dataset ingestion into sequences.

Storytelling input arrives as text + image steps; how-to articles arrive as
text only and get their visuals downstream through unification. Ingestion
prefers robustness over strictness: odd step counts are kept with a
warning, empty articles are skipped, but unreadable assets are hard errors
that name the offending file.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .errors import IngestionError, InputError
from .model import Sequence, SourceKind, TaskKind, TextVisualPair, VisualAsset

logger = logging.getLogger(__name__)

EXPECTED_STORY_STEPS = 5


@dataclass(frozen=True)
class TextOnlySequence:
    """A parsed sequence that still lacks visuals (pre-unification)."""

    id: str
    task: TaskKind
    texts: tuple[str, ...]
    title: str | None = None


ParsedItem = "Sequence | TextOnlySequence"


def _load_json_array(path: Path) -> list:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    if not isinstance(payload, list):
        raise IngestionError(f"{path} must hold a JSON array")
    return payload


def _load_asset(image_path: Path, story_id: str, step: int) -> VisualAsset:
    try:
        data = image_path.read_bytes()
    except OSError as exc:
        raise IngestionError(f"missing image file {image_path}") from exc
    try:
        return VisualAsset.from_png(data, SourceKind.DATASET)
    except InputError as exc:
        raise IngestionError(
            f"story {story_id!r} step {step}: unreadable PNG {image_path}"
        ) from exc


def parse_vist(path: Path) -> list[Sequence]:
    """[{"story_id": s, "steps": [{"text": s, "image_path": s} x5]}]

    Image paths are resolved relative to the JSON file's directory.
    """
    path = Path(path)
    base = path.parent
    sequences: list[Sequence] = []
    for entry in _load_json_array(path):
        try:
            story_id = entry["story_id"]
            steps = entry["steps"]
        except (TypeError, KeyError) as exc:
            raise IngestionError(f"{path}: story entry missing {exc}") from exc
        if len(steps) != EXPECTED_STORY_STEPS:
            logger.warning(
                "story %r has %d steps (expected %d); keeping it",
                story_id,
                len(steps),
                EXPECTED_STORY_STEPS,
            )
        pairs = []
        for i, step in enumerate(steps):
            try:
                text = step["text"]
                image_path = base / step["image_path"]
            except (TypeError, KeyError) as exc:
                raise IngestionError(
                    f"story {story_id!r} step {i}: missing {exc}"
                ) from exc
            pairs.append(
                TextVisualPair(text=text, visual=_load_asset(image_path, story_id, i))
            )
        sequences.append(
            Sequence(id=str(story_id), task=TaskKind.STORYTELLING, elements=tuple(pairs))
        )
    return sequences


def parse_wikihow(path: Path) -> list[TextOnlySequence]:
    """[{"title": s, "steps": [s, ...]}] -> text-only summarization sequences."""
    path = Path(path)
    sequences: list[TextOnlySequence] = []
    for i, entry in enumerate(_load_json_array(path)):
        if not isinstance(entry, dict) or "title" not in entry:
            raise IngestionError(f"{path}: article {i} has no title")
        title = entry["title"]
        steps = tuple(s.strip() for s in entry.get("steps", []) if str(s).strip())
        if not steps:
            logger.warning("article %r has no usable steps; skipping it", title)
            continue
        sequences.append(
            TextOnlySequence(
                id=f"wikihow-{i}", task=TaskKind.SUMMARIZATION, texts=steps, title=title
            )
        )
    return sequences


def parse_generic(path: Path) -> list:
    """[{"id": s, "task"?: s, "title"?: s, "steps": [{"text": s, "image_path"?: s}]}]

    Entries whose steps all carry images become full sequences; the rest
    stay text-only and flow through unification.
    """
    path = Path(path)
    base = path.parent
    items: list = []
    for i, entry in enumerate(_load_json_array(path)):
        try:
            item_id = str(entry["id"])
            steps = entry["steps"]
        except (TypeError, KeyError) as exc:
            raise IngestionError(f"{path}: entry {i} missing {exc}") from exc
        if not steps:
            logger.warning("entry %r has no steps; skipping it", item_id)
            continue
        task = TaskKind(entry.get("task", "generic"))
        title = entry.get("title")
        if all("image_path" in s for s in steps):
            pairs = tuple(
                TextVisualPair(
                    text=s["text"],
                    visual=_load_asset(base / s["image_path"], item_id, j),
                )
                for j, s in enumerate(steps)
            )
            items.append(Sequence(id=item_id, task=task, elements=pairs, title=title))
        else:
            items.append(
                TextOnlySequence(
                    id=item_id,
                    task=task,
                    texts=tuple(s["text"] for s in steps),
                    title=title,
                )
            )
    return items
