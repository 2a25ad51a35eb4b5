"""Self-contained demo inputs, so the CLI can be tried without any dataset."""

from __future__ import annotations

import io
import json
from pathlib import Path

from PIL import Image

_STORIES = [
    (
        "beach-day",
        [
            ("We packed the car full of towels and snacks.", (66, 135, 245)),
            ("The kids raced each other down the boardwalk.", (245, 188, 66)),
            ("Sandcastles rose all along the waterline.", (222, 184, 135)),
            ("Lunch was sandwiches under the big umbrella.", (245, 66, 93)),
            ("Everyone slept on the drive home.", (88, 88, 120)),
        ],
    ),
    (
        "garden-spring",
        [
            ("The last frost finally let go of the yard.", (180, 200, 220)),
            ("We turned the beds and mixed in compost.", (120, 84, 50)),
            ("Seed packets were sorted across the table.", (200, 220, 160)),
            ("Rows of seedlings stood in neat lines.", (90, 160, 90)),
            ("By June the garden was a small jungle.", (34, 120, 60)),
        ],
    ),
]

_ARTICLES = [
    {
        "title": "How to Brew Pour-Over Coffee",
        "steps": [
            "Heat water to just below boiling.",
            "Grind the beans to a medium-fine consistency.",
            "Rinse the paper filter and warm the mug.",
            "Pour in slow circles and let it bloom.",
            "Serve immediately.",
        ],
    },
    {
        "title": "How to Patch a Bicycle Tube",
        "steps": [
            "Find the puncture with a bowl of water.",
            "Rough up the area around the hole.",
            "Apply the patch and press firmly.",
            "Reinflate and check for leaks.",
        ],
    },
]

_ANNOTATIONS = """\
item_id,metric,mode,pairwise_outcome,scale_score,baseline,annotator_id,passed_attention_check
beach-day-g0,image_consistency,pairwise,win,,cot_plus_coi,w1,true
beach-day-g0,image_consistency,pairwise,tie,,cot_plus_coi,w2,true
beach-day-g1,image_consistency,pairwise,tie,,cot_plus_coi,w1,true
beach-day-g1,image_consistency,pairwise,loss,,cot_plus_coi,w3,true
beach-day-g2,text_novelty,pairwise,win,,random,w1,true
beach-day-g2,text_novelty,pairwise,win,,random,w2,false
garden-spring-g0,novelty,scale,,4,vcot,w1,true
garden-spring-g0,novelty,scale,,3,vcot,w2,true
garden-spring-g1,novelty,scale,,2,vcot,w3,true
garden-spring-g1,consistency,scale,,5,vcot,w1,true
"""

_CONFIG = """\
[run]
dataset = "vist.json"
format = "vist"
out = "runs/demo"
seed = 7
depth = 2
backend = "mock"
baselines = ["cot_plus_coi", "no_infilling"]

[generation]
text_candidates = 5
image_candidates = 4
"""


def _png(color: tuple[int, int, int]) -> bytes:
    buf = io.BytesIO()
    Image.new("RGB", (32, 32), color).save(buf, format="PNG")
    return buf.getvalue()


def write_demo(out_dir: Path) -> Path:
    """Write a two-story image dataset, a text-only article file, a config,
    and a small annotation CSV into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stories = []
    for story_id, steps in _STORIES:
        step_entries = []
        for i, (text, color) in enumerate(steps):
            name = f"{story_id}_{i}.png"
            (out / name).write_bytes(_png(color))
            step_entries.append({"text": text, "image_path": name})
        stories.append({"story_id": story_id, "steps": step_entries})
    (out / "vist.json").write_text(json.dumps(stories, indent=2), encoding="utf-8")
    (out / "wikihow.json").write_text(json.dumps(_ARTICLES, indent=2), encoding="utf-8")
    (out / "annotations.csv").write_text(_ANNOTATIONS, encoding="utf-8")
    (out / "config.toml").write_text(_CONFIG, encoding="utf-8")
    return out
