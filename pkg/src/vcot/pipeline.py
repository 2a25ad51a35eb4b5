"""Pipeline orchestration: ingest, unify, foveate, infill, run downstream
tasks and baselines, and persist an auditable run directory.

Run directory layout::

    config.json     effective configuration snapshot
    assets/         every referenced PNG, named by content hash
    nodes.jsonl     one record per infilling node (all methods)
    outputs.jsonl   sequence, foveation, and downstream-output records
    report.md       merged galleries in order, with tags/scores/depths
    report.html     the same, with inline image tags
    stats.json      backend call counts and cache hit/miss counters

nodes.jsonl, outputs.jsonl, and report.md are byte-reproducible for a
given config under mock backends; stats.json is not (a warm cache changes
the counters, which is the point of having them).
"""

from __future__ import annotations

import json
import logging
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .backends import MockModelService, ModelGateway, ResponseCache, build_service
from .backends.gateway import ModelService
from .config import RunConfig
from .datasets import TextOnlySequence, parse_generic, parse_vist, parse_wikihow
from .downstream import build_story, summarize_instructions
from .errors import DegenerateFoveationError, InputError, VcotError
from .evaluation import BaselineKind, run_baseline
from .foveation import multipoint_foveation
from .infill import EngineSettings, infill_sequence
from .model import AugmentedSequence, RecursionPolicy, Sequence, TaskKind
from .prompts import TemplateSet
from .unify import unify_text_sequence

logger = logging.getLogger(__name__)

VCOT_METHOD = "vcot"


def jsonl_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass
class SequenceOutcome:
    index: int
    sequence_id: str
    task: str
    node_records: list[dict] = field(default_factory=list)
    output_records: list[dict] = field(default_factory=list)
    assets: dict[str, bytes] = field(default_factory=dict)
    method_views: list[tuple[str, list[dict]]] = field(default_factory=list)
    downstream: dict[str, list[str]] = field(default_factory=dict)
    focus: str | None = None
    error: str | None = None


@dataclass
class RunContext:
    config: RunConfig
    gateway: ModelGateway
    templates: TemplateSet
    policy: RecursionPolicy
    settings: EngineSettings


def _merged_view(aug: AugmentedSequence) -> list[dict]:
    """Report rows for one method's merged sequence, in merged order."""
    rows = []
    for entry in aug.merged:
        node = entry.node
        rows.append(
            {
                "kind": entry.kind,
                "text": entry.pair.text,
                "caption": entry.pair.caption,
                "asset_id": entry.pair.visual.id if entry.pair.visual else None,
                "gap_index": node.gap_index if node else None,
                "depth": node.depth if node else None,
                "text_score": node.text_score if node else None,
                "visual_score": node.visual_score if node else None,
            }
        )
    return rows


def _node_records(sequence_id: str, method: str, aug: AugmentedSequence) -> list[dict]:
    records = []
    for position, node in enumerate(aug.infillings):
        records.append(
            {
                "record": "node",
                "sequence_id": sequence_id,
                "method": method,
                "position": position,
                "gap_index": node.gap_index,
                "depth": node.depth,
                "text": node.pair.text,
                "caption": node.pair.caption,
                "asset_id": node.pair.visual.id if node.pair.visual else None,
                "text_score": node.text_score,
                "visual_score": node.visual_score,
                "candidate_index_text": node.candidate_index_text,
                "candidate_index_visual": node.candidate_index_visual,
                "novelty_proxy": node.novelty_proxy,
                "text_prompt_sha256": node.text_prompt_sha256,
                "image_prompt_sha256": node.image_prompt_sha256,
                "text_scores": list(node.text_scores) if node.text_scores else None,
                "visual_scores": list(node.visual_scores) if node.visual_scores else None,
                "candidate_texts": list(node.candidate_texts) if node.candidate_texts else None,
            }
        )
    return records


def _collect_assets(outcome: SequenceOutcome, aug: AugmentedSequence) -> None:
    for entry in aug.merged:
        if entry.pair.visual is not None:
            outcome.assets.setdefault(entry.pair.visual.id, entry.pair.visual.png_bytes)


def _run_downstream(
    outcome: SequenceOutcome,
    method: str,
    aug: AugmentedSequence,
    foveation,
    exemplars: str,
    ctx: RunContext,
) -> None:
    task = aug.original.task
    if task is TaskKind.GENERIC:
        return
    captured: list[dict] = []
    if task is TaskKind.STORYTELLING:
        steps = build_story(
            aug, foveation, exemplars, ctx.gateway, ctx.templates,
            max_tokens=ctx.config.generation.max_tokens_summary,
            seed=ctx.config.seed, capture=captured,
        )
    else:
        steps = summarize_instructions(
            aug, foveation, exemplars, ctx.gateway, ctx.templates,
            max_tokens=ctx.config.generation.max_tokens_summary,
            seed=ctx.config.seed, capture=captured,
        )
    outcome.downstream[method] = steps
    for item in captured:
        record = {"record": item.pop("kind"), "sequence_id": outcome.sequence_id, "method": method}
        record.update(item)
        outcome.output_records.append(record)


def process_item(index: int, item, ctx: RunContext) -> SequenceOutcome:
    config = ctx.config
    if isinstance(item, TextOnlySequence):
        outcome = SequenceOutcome(index=index, sequence_id=item.id, task=item.task.value)
        if config.no_infill:
            outcome.method_views.append(
                (
                    "ingestion echo",
                    [
                        {"kind": "original", "text": t, "caption": None, "asset_id": None,
                         "gap_index": None, "depth": None, "text_score": None, "visual_score": None}
                        for t in item.texts
                    ],
                )
            )
            return outcome
        seq = unify_text_sequence(
            list(item.texts),
            k=config.generation.unify_candidates,
            gateway=ctx.gateway,
            seed=config.seed,
            sequence_id=item.id,
            task=item.task,
            title=item.title,
            aggregate=config.generation.neighbor_aggregate,
        )
    else:
        seq = item
        outcome = SequenceOutcome(index=index, sequence_id=seq.id, task=seq.task.value)
        if config.no_infill:
            aug = AugmentedSequence.passthrough(seq)
            _collect_assets(outcome, aug)
            outcome.method_views.append(("ingestion echo", _merged_view(aug)))
            return outcome

    exemplars = ctx.templates.exemplars_for(seq.task)
    fov_capture: list[dict] = []
    try:
        foveation = multipoint_foveation(
            seq, exemplars, config.generation.summary_candidates, ctx.gateway,
            ctx.templates, summary_temperature=config.generation.summary_temperature,
            max_tokens=config.generation.max_tokens_summary,
            seed=config.seed, capture=fov_capture,
        )
    except DegenerateFoveationError:
        logger.warning("sequence %s: empty focus, retrying extraction at 0.5", seq.id)
        foveation = multipoint_foveation(
            seq, exemplars, config.generation.summary_candidates, ctx.gateway,
            ctx.templates, summary_temperature=config.generation.summary_temperature,
            focus_temperature=0.5, max_tokens=config.generation.max_tokens_summary,
            seed=config.seed, capture=fov_capture,
        )
    outcome.focus = foveation.focus
    audit = fov_capture[-1]
    outcome.output_records.append(
        {
            "record": "foveation",
            "sequence_id": seq.id,
            "focus": foveation.focus,
            "summary": foveation.summary,
            "summary_loglik": foveation.summary_loglik,
            "selected_index": audit["selected_index"],
            "candidates": [
                {
                    "text": c.text,
                    "token_logprobs": list(c.token_logprobs),
                    "loglik": c.loglik,
                }
                for c in audit["candidates"]
            ],
        }
    )

    vcot_aug = infill_sequence(
        seq, foveation, ctx.policy, ctx.gateway, ctx.templates, exemplars, ctx.settings
    )
    pool = [node.pair for node in vcot_aug.infillings]

    methods: list[tuple[str, AugmentedSequence]] = [(VCOT_METHOD, vcot_aug)]
    for name in config.baselines:
        kind = BaselineKind(name)
        methods.append(
            (
                name,
                run_baseline(
                    seq, foveation, ctx.policy, ctx.gateway, kind, ctx.templates,
                    exemplars, ctx.settings, pool=pool, seed=config.seed,
                ),
            )
        )

    for method, aug in methods:
        _run_downstream(outcome, method, aug, foveation, exemplars, ctx)
        outcome.node_records.extend(_node_records(seq.id, method, aug))
        _collect_assets(outcome, aug)
        outcome.method_views.append((method, _merged_view(aug)))

    outcome.output_records.append(
        {
            "record": "sequence",
            "sequence_id": seq.id,
            "task": seq.task.value,
            "n_elements": len(seq.elements),
            "methods": {
                method: {"n_infillings": len(aug.infillings), "merged_length": len(aug.merged)}
                for method, aug in methods
            },
        }
    )
    return outcome


def parse_dataset(config: RunConfig) -> list:
    if config.dataset is None:
        raise InputError("no dataset configured (pass --dataset or set run.dataset)")
    parser = {"vist": parse_vist, "wikihow": parse_wikihow, "generic": parse_generic}.get(
        config.format
    )
    if parser is None:
        raise InputError(f"unknown dataset format {config.format!r}")
    return parser(config.dataset)


def run_pipeline(
    config: RunConfig, service: ModelService | None = None
) -> tuple[Path, dict]:
    """Execute the full pipeline; returns (run directory, stats)."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "assets").mkdir(exist_ok=True)

    profile = config.resolve_profile()
    if service is None:
        service = build_service(profile, MockModelService())
    cache = ResponseCache(out / "cache")
    gateway = ModelGateway(profile, service=service, cache=cache)

    ctx = RunContext(
        config=config,
        gateway=gateway,
        templates=TemplateSet.load(config.templates_dir),
        policy=RecursionPolicy(depth_limit=config.depth),
        settings=EngineSettings(
            n_text=config.generation.text_candidates,
            n_visual=config.generation.image_candidates,
            candidate_temperature=config.generation.candidate_temperature,
            max_tokens=config.generation.max_tokens_infilling,
            seed=config.seed,
            text_anchor=config.generation.text_anchor,
        ),
    )

    items = parse_dataset(config)
    outcomes: list[SequenceOutcome] = []

    def safe_process(pair) -> SequenceOutcome:
        index, item = pair
        item_id = getattr(item, "id", f"item-{index}")
        try:
            return process_item(index, item, ctx)
        except VcotError as exc:
            logger.error("sequence %s failed: %s", item_id, exc)
            return SequenceOutcome(
                index=index, sequence_id=item_id, task="", error=str(exc)
            )
        except Exception as exc:  # defensive: never lose the whole run
            logger.error("sequence %s crashed: %s", item_id, traceback.format_exc())
            return SequenceOutcome(
                index=index, sequence_id=item_id, task="", error=f"internal error: {exc}"
            )

    if config.workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(safe_process, enumerate(items)))
    else:
        outcomes = [safe_process(pair) for pair in enumerate(items)]
    outcomes.sort(key=lambda o: o.index)

    # single-writer journals, strictly in input order
    with open(out / "nodes.jsonl", "w", encoding="utf-8") as fh:
        for outcome in outcomes:
            for record in outcome.node_records:
                fh.write(jsonl_line(record) + "\n")
    with open(out / "outputs.jsonl", "w", encoding="utf-8") as fh:
        for outcome in outcomes:
            for record in outcome.output_records:
                fh.write(jsonl_line(record) + "\n")
    for outcome in outcomes:
        for asset_id, data in sorted(outcome.assets.items()):
            path = out / "assets" / f"{asset_id}.png"
            if not path.exists():
                path.write_bytes(data)

    from .report import render_markdown_report, render_html_report

    (out / "report.md").write_text(render_markdown_report(config, outcomes), encoding="utf-8")
    (out / "report.html").write_text(render_html_report(config, outcomes), encoding="utf-8")
    (out / "config.json").write_text(
        json.dumps(config.snapshot(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    failed = sum(1 for o in outcomes if o.error is not None)
    stats = {
        "sequences": len(outcomes),
        "failed": failed,
        "backend_calls": dict(sorted(gateway.backend_calls.items())),
        "total_backend_calls": gateway.total_backend_calls,
        "cache": {"hits": cache.hits, "misses": cache.misses},
    }
    (out / "stats.json").write_text(
        json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return out, stats
