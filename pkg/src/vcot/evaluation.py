"""Baselines for head-to-head comparison plus human-annotation tabulation.

Baselines reuse the exact recursion structure of the main engine so every
method produces nodes at identical positions; only the per-node generation
differs. Tabulation turns annotation records into win-tie-loss and
good/neutral/poor percentage triples, rounded half-up to two decimals.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from pathlib import Path

from .backends.gateway import ModelGateway
from .errors import EmptySliceError, GenerationError, InputError
from .foveation import caption_for
from .infill import EngineSettings, recurse_gap
from .model import (
    AugmentedSequence,
    Foveation,
    InfillingNode,
    RecursionPolicy,
    Sequence,
    TextVisualPair,
    inorder_depths,
    merge_gap_results,
)
from .prompts import TemplateSet, render


class BaselineKind(str, Enum):
    COT = "cot"
    COI = "coi"
    COT_PLUS_COI = "cot_plus_coi"
    RANDOM = "random"
    NO_INFILLING = "no_infilling"


class Metric(str, Enum):
    IMAGE_CONSISTENCY = "image_consistency"
    TEXT_CONSISTENCY = "text_consistency"
    IMAGE_NOVELTY = "image_novelty"
    TEXT_NOVELTY = "text_novelty"
    NOVELTY = "novelty"
    CONSISTENCY = "consistency"
    DESCRIPTIVENESS = "descriptiveness"
    COHERENCE = "coherence"


class AnnotationMode(str, Enum):
    PAIRWISE = "pairwise"
    SCALE = "scale"


class PairwiseOutcome(str, Enum):
    WIN = "win"
    TIE = "tie"
    LOSS = "loss"


class Method(str, Enum):
    """What a record compares against (pairwise) or rates (scale)."""

    VCOT = "vcot"
    COT_PLUS_COI = "cot_plus_coi"
    COT = "cot"
    COI = "coi"
    RANDOM = "random"
    NO_INFILLING = "no_infilling"
    REFERENCE = "reference"


@dataclass(frozen=True)
class AnnotationRecord:
    """One human rating: a pairwise outcome against a baseline, or a 1-5
    score of one method's output."""

    item_id: str
    metric: Metric
    mode: AnnotationMode
    pairwise_outcome: PairwiseOutcome | None
    scale_score: int | None
    baseline: Method
    annotator_id: str

    def __post_init__(self) -> None:
        if self.mode is AnnotationMode.PAIRWISE:
            if self.pairwise_outcome is None or self.scale_score is not None:
                raise InputError("pairwise records carry exactly an outcome")
        else:
            if self.scale_score is None or self.pairwise_outcome is not None:
                raise InputError("scale records carry exactly a score")
            if not 1 <= self.scale_score <= 5:
                raise InputError(f"scale score {self.scale_score} outside 1..5")


# ---------------------------------------------------------------------------
# baselines


def _cot_nodes(
    seq: Sequence,
    policy: RecursionPolicy,
    gateway: ModelGateway,
    templates: TemplateSet,
    exemplars: str,
    settings: EngineSettings,
) -> list[list[InfillingNode]]:
    """Text-only recursion: one deterministic candidate, no selection, no
    visual slot."""

    def make_node(prev: TextVisualPair, next: TextVisualPair, depth: int, gap: int):
        prompt = render(
            templates.cot_infilling,
            exemplars=exemplars,
            prev_text=prev.text or "",
            next_text=next.text or "",
        )
        text = gateway.generate_text(
            prompt, temperature=0.0, n=1, max_tokens=settings.max_tokens, seed=settings.seed
        )[0].text
        if not text.strip():
            raise GenerationError(f"text-only infilling for gap {gap} came back empty")
        return InfillingNode(
            pair=TextVisualPair(text=text, visual=None),
            depth=depth,
            gap_index=gap,
            text_score=None,
            visual_score=None,
            candidate_index_text=0,
            candidate_index_visual=None,
        )

    return [
        recurse_gap(seq.elements[g], seq.elements[g + 1], 1, policy, g, make_node)
        for g in range(seq.gap_count)
    ]


def _coi_nodes(
    seq: Sequence,
    policy: RecursionPolicy,
    gateway: ModelGateway,
    settings: EngineSettings,
) -> list[list[InfillingNode]]:
    """Image-only recursion: one visual from the concatenated neighbor
    captions, no text slot."""

    def make_node(prev: TextVisualPair, next: TextVisualPair, depth: int, gap: int):
        prompt = f"{caption_for(prev, gateway)} {caption_for(next, gateway)}"
        visual = gateway.generate_image(prompt, n=1, seed=settings.seed)[0]
        return InfillingNode(
            pair=TextVisualPair(text=None, visual=visual),
            depth=depth,
            gap_index=gap,
            text_score=None,
            visual_score=None,
            candidate_index_text=None,
            candidate_index_visual=0,
        )

    return [
        recurse_gap(seq.elements[g], seq.elements[g + 1], 1, policy, g, make_node)
        for g in range(seq.gap_count)
    ]


def run_baseline(
    seq: Sequence,
    foveation: Foveation | None,
    policy: RecursionPolicy,
    gateway: ModelGateway,
    kind: BaselineKind,
    templates: TemplateSet,
    exemplars: str,
    settings: EngineSettings = EngineSettings(),
    pool: list[TextVisualPair] | None = None,
    seed: int = 0,
) -> AugmentedSequence:
    """Produce a baseline augmentation structurally isomorphic to the main
    engine's output at the same recursion depth."""
    if kind is BaselineKind.NO_INFILLING:
        return AugmentedSequence.passthrough(seq)

    if kind is BaselineKind.COT:
        return merge_gap_results(
            seq, _cot_nodes(seq, policy, gateway, templates, exemplars, settings)
        )

    if kind is BaselineKind.COI:
        return merge_gap_results(seq, _coi_nodes(seq, policy, gateway, settings))

    if kind is BaselineKind.COT_PLUS_COI:
        cot = _cot_nodes(seq, policy, gateway, templates, exemplars, settings)
        coi = _coi_nodes(seq, policy, gateway, settings)
        per_gap = []
        for gap_cot, gap_coi in zip(cot, coi):
            per_gap.append(
                [
                    InfillingNode(
                        pair=TextVisualPair(text=a.pair.text, visual=b.pair.visual),
                        depth=a.depth,
                        gap_index=a.gap_index,
                        text_score=None,
                        visual_score=None,
                        candidate_index_text=0,
                        candidate_index_visual=0,
                    )
                    for a, b in zip(gap_cot, gap_coi)
                ]
            )
        return merge_gap_results(seq, per_gap)

    if kind is BaselineKind.RANDOM:
        if not pool:
            raise InputError("random baseline needs a non-empty infilling pool")
        rng = random.Random(f"{seed}:{seq.id}:random")
        depths = inorder_depths(policy.depth_limit)
        per_gap = []
        for gap in range(seq.gap_count):
            per_gap.append(
                [
                    InfillingNode(
                        pair=pool[rng.randrange(len(pool))],
                        depth=depth,
                        gap_index=gap,
                        text_score=None,
                        visual_score=None,
                        candidate_index_text=None,
                        candidate_index_visual=None,
                    )
                    for depth in depths
                ]
            )
        return merge_gap_results(seq, per_gap)

    raise InputError(f"unknown baseline kind {kind!r}")


# ---------------------------------------------------------------------------
# tabulation


def round_half_up(value: float, places: int = 2) -> float:
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(str(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def tabulate_win_tie_loss(
    records: list[AnnotationRecord], metric: Metric, baseline: Method
) -> tuple[float, float, float]:
    """(win%, tie%, loss%) over pairwise records of one metric/baseline."""
    matching = [
        r
        for r in records
        if r.mode is AnnotationMode.PAIRWISE
        and r.metric is metric
        and r.baseline is baseline
    ]
    if not matching:
        raise EmptySliceError(f"no pairwise records for {metric.value}/{baseline.value}")
    total = len(matching)
    counts = {outcome: 0 for outcome in PairwiseOutcome}
    for record in matching:
        counts[record.pairwise_outcome] += 1
    return tuple(
        round_half_up(100.0 * counts[outcome] / total) for outcome in PairwiseOutcome
    )


def tabulate_scale(
    records: list[AnnotationRecord], metric: Metric, method: Method
) -> tuple[float, float, float]:
    """(good%, neutral%, poor%): scores 4-5 are good, 3 neutral, 1-2 poor."""
    matching = [
        r
        for r in records
        if r.mode is AnnotationMode.SCALE and r.metric is metric and r.baseline is method
    ]
    if not matching:
        raise EmptySliceError(f"no scale records for {metric.value}/{method.value}")
    buckets = {"good": 0, "neutral": 0, "poor": 0}
    for record in matching:
        score = record.scale_score
        if not 1 <= score <= 5:
            raise InputError(f"scale score {score} outside 1..5")
        if score >= 4:
            buckets["good"] += 1
        elif score == 3:
            buckets["neutral"] += 1
        else:
            buckets["poor"] += 1
    total = len(matching)
    return tuple(
        round_half_up(100.0 * buckets[name] / total) for name in ("good", "neutral", "poor")
    )


# ---------------------------------------------------------------------------
# annotation CSV and summaries

CSV_FIELDS = (
    "item_id",
    "metric",
    "mode",
    "pairwise_outcome",
    "scale_score",
    "baseline",
    "annotator_id",
)


def read_annotations_csv(path: Path) -> list[AnnotationRecord]:
    """Parse annotation records; rows failing the optional attention check
    column are dropped before any tabulation."""
    records: list[AnnotationRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise InputError(f"annotation CSV missing columns: {sorted(missing)}")
        for i, row in enumerate(reader):
            attention = (row.get("passed_attention_check") or "true").strip().lower()
            if attention in ("false", "0", "no"):
                continue
            try:
                outcome = (row.get("pairwise_outcome") or "").strip()
                score = (row.get("scale_score") or "").strip()
                records.append(
                    AnnotationRecord(
                        item_id=row["item_id"].strip(),
                        metric=Metric(row["metric"].strip()),
                        mode=AnnotationMode(row["mode"].strip()),
                        pairwise_outcome=PairwiseOutcome(outcome) if outcome else None,
                        scale_score=int(score) if score else None,
                        baseline=Method(row["baseline"].strip()),
                        annotator_id=row["annotator_id"].strip(),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise InputError(f"annotation CSV row {i + 2}: {exc}") from exc
    return records


def summarize_annotations(records: list[AnnotationRecord]) -> dict:
    """Every (metric, method) slice present in the records, tabulated."""
    summary: dict = {"win_tie_loss": {}, "scale": {}}
    pairwise_slices = sorted(
        {
            (r.metric, r.baseline)
            for r in records
            if r.mode is AnnotationMode.PAIRWISE
        },
        key=lambda pair: (pair[0].value, pair[1].value),
    )
    for metric, baseline in pairwise_slices:
        win, tie, loss = tabulate_win_tie_loss(records, metric, baseline)
        summary["win_tie_loss"].setdefault(metric.value, {})[baseline.value] = {
            "win": win,
            "tie": tie,
            "loss": loss,
        }
    scale_slices = sorted(
        {(r.metric, r.baseline) for r in records if r.mode is AnnotationMode.SCALE},
        key=lambda pair: (pair[0].value, pair[1].value),
    )
    for metric, method in scale_slices:
        good, neutral, poor = tabulate_scale(records, metric, method)
        summary["scale"].setdefault(metric.value, {})[method.value] = {
            "good": good,
            "neutral": neutral,
            "poor": poor,
        }
    return summary


def summary_markdown(summary: dict) -> str:
    lines = ["# Annotation summary", ""]
    if summary["win_tie_loss"]:
        lines += ["## Pairwise (vcot vs baseline, %)", ""]
        lines.append("| metric | baseline | win | tie | loss |")
        lines.append("| --- | --- | ---: | ---: | ---: |")
        for metric, per_baseline in summary["win_tie_loss"].items():
            for baseline, triple in per_baseline.items():
                lines.append(
                    f"| {metric} | {baseline} | {triple['win']:.2f} "
                    f"| {triple['tie']:.2f} | {triple['loss']:.2f} |"
                )
        lines.append("")
    if summary["scale"]:
        lines += ["## 5-point scale (%)", ""]
        lines.append("| metric | method | good | neutral | poor |")
        lines.append("| --- | --- | ---: | ---: | ---: |")
        for metric, per_method in summary["scale"].items():
            for method, triple in per_method.items():
                lines.append(
                    f"| {metric} | {method} | {triple['good']:.2f} "
                    f"| {triple['neutral']:.2f} | {triple['poor']:.2f} |"
                )
        lines.append("")
    return "\n".join(lines)
