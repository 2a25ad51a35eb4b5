"""Recursive multimodal infilling.

One gap is bridged by generating candidate texts (one deterministic, the
rest sampled), keeping the candidate most consistent with its neighbors by
embedding similarity, then generating candidate visuals from the winning
text and keeping the visual closest to it. Gaps are filled recursively to a
fixed depth: the midpoint splits its gap in two, and both halves recurse.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Literal

from .backends.gateway import ModelGateway
from .backends.profile import Embedding, TextGeneration
from .backends.similarity import argmax_lowest_tie, cosine
from .errors import GenerationError, InfillingError, InputError, VcotError
from .foveation import caption_for
from .model import (
    AugmentedSequence,
    Foveation,
    InfillingNode,
    RecursionPolicy,
    Sequence,
    TextVisualPair,
    VisualAsset,
    merge_gap_results,
)
from .prompts import TemplateSet, render


@dataclass(frozen=True)
class GapTask:
    """One midpoint generation job between two neighboring pairs."""

    prev: TextVisualPair
    next: TextVisualPair
    depth: int
    foveation: Foveation

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise InputError("gap depth must be >= 1")


@dataclass(frozen=True)
class CandidateSet:
    """Audit record of everything a midpoint selection looked at."""

    texts: tuple[TextGeneration, ...]
    visuals: tuple[VisualAsset, ...]
    text_scores: tuple[float, ...]
    visual_scores: tuple[float, ...]
    chosen_text: int
    chosen_visual: int


@dataclass(frozen=True)
class EngineSettings:
    """Tunables of the candidate scheme; defaults follow the shipped recipe
    of five texts (one at temperature 0) and four visuals."""

    n_text: int = 5
    n_visual: int = 4
    candidate_temperature: float = 0.5
    max_tokens: int = 256
    seed: int = 0
    # Score text candidates against the neighbors' text embeddings (default)
    # or their visual embeddings.
    text_anchor: Literal["text", "visual"] = "text"


def score_consistency(
    candidate: Embedding, prev: Embedding, next: Embedding
) -> float:
    """Mean cosine of a candidate against both neighbors."""
    return (cosine(candidate, prev) + cosine(candidate, next)) / 2.0


def novelty_proxy(candidate: Embedding, prev: Embedding, next: Embedding) -> float:
    """1 minus the closest-neighbor cosine. Diagnostic only: reported in run
    artifacts, never used for selection."""
    return 1.0 - max(cosine(candidate, prev), cosine(candidate, next))


def select_text_index(
    candidates: list[Embedding | None], prev: Embedding, next: Embedding
) -> tuple[int, list[float]]:
    """Argmax of mean neighbor cosine; ties break to the lowest index.

    ``None`` marks an unembeddable (empty) candidate: it is floored at -1
    in the recorded scores and never selected.
    """
    scores = [
        -1.0 if emb is None else score_consistency(emb, prev, next)
        for emb in candidates
    ]
    eligible = [i for i, emb in enumerate(candidates) if emb is not None]
    if not eligible:
        raise GenerationError("no embeddable text candidates")
    best = min(eligible, key=lambda i: (-scores[i], i))
    return best, scores


def select_visual_index(
    candidates: list[Embedding], text: Embedding
) -> tuple[int, list[float]]:
    """Argmax of cosine against the chosen text; ties to the lowest index."""
    scores = [cosine(emb, text) for emb in candidates]
    return argmax_lowest_tie(scores), scores


def candidate_texts(
    gateway: ModelGateway, prompt: str, settings: EngineSettings
) -> list[TextGeneration]:
    """The 1 + (n-1) temperature scheme: candidate 0 is always the
    deterministic generation, the rest one sampled batch."""
    generations = gateway.generate_text(
        prompt,
        temperature=0.0,
        n=1,
        max_tokens=settings.max_tokens,
        seed=settings.seed,
    )
    if settings.n_text > 1:
        generations += gateway.generate_text(
            prompt,
            temperature=settings.candidate_temperature,
            n=settings.n_text - 1,
            max_tokens=settings.max_tokens,
            seed=settings.seed,
        )
    return generations


def gen_infilling(
    task: GapTask,
    gateway: ModelGateway,
    templates: TemplateSet,
    exemplars: str,
    settings: EngineSettings = EngineSettings(),
    gap_index: int = 0,
    collect: list | None = None,
) -> InfillingNode:
    """Generate the single most consistent infilling for one gap."""
    if task.prev.visual is None or task.next.visual is None:
        raise InputError("infilling needs visuals on both neighbors")
    if settings.n_text < 1 or settings.n_visual < 1:
        raise InputError("candidate counts must be >= 1")

    prompt = render(
        templates.infilling,
        exemplars=exemplars,
        focus=task.foveation.focus,
        prev_caption=caption_for(task.prev, gateway),
        prev_text=task.prev.text or "",
        next_caption=caption_for(task.next, gateway),
        next_text=task.next.text or "",
    )
    texts = candidate_texts(gateway, prompt, settings)
    if all(not t.text.strip() for t in texts):
        raise GenerationError("every text candidate came back empty")

    anchor_kind = settings.text_anchor
    anchor_items = (
        [("text", task.prev.text), ("text", task.next.text)]
        if anchor_kind == "text"
        else [("image", task.prev.visual), ("image", task.next.visual)]
    )
    embeddable = [i for i, t in enumerate(texts) if t.text.strip()]
    response = gateway.embed(
        [("text", texts[i].text) for i in embeddable] + anchor_items
    )
    prev_emb, next_emb = response[-2], response[-1]
    by_candidate: list[Embedding | None] = [None] * len(texts)
    for slot, i in enumerate(embeddable):
        by_candidate[i] = response[slot]

    chosen_text, text_scores = select_text_index(by_candidate, prev_emb, next_emb)
    best_text = texts[chosen_text].text

    visuals = gateway.generate_image(best_text, n=settings.n_visual, seed=settings.seed)
    visual_response = gateway.embed(
        [("image", v) for v in visuals] + [("text", best_text)]
    )
    visual_embs, best_text_emb = visual_response[:-1], visual_response[-1]
    chosen_visual, visual_scores = select_visual_index(visual_embs, best_text_emb)

    node = InfillingNode(
        pair=TextVisualPair(text=best_text, visual=visuals[chosen_visual]),
        depth=task.depth,
        gap_index=gap_index,
        text_score=text_scores[chosen_text],
        visual_score=visual_scores[chosen_visual],
        candidate_index_text=chosen_text,
        candidate_index_visual=chosen_visual,
        novelty_proxy=novelty_proxy(by_candidate[chosen_text], prev_emb, next_emb),
        text_prompt_sha256=hashlib.sha256(prompt.encode("utf-8")).hexdigest(),
        image_prompt_sha256=hashlib.sha256(best_text.encode("utf-8")).hexdigest(),
        text_scores=tuple(text_scores),
        visual_scores=tuple(visual_scores),
        candidate_texts=tuple(t.text for t in texts),
    )
    if collect is not None:
        collect.append(
            CandidateSet(
                texts=tuple(texts),
                visuals=tuple(visuals),
                text_scores=tuple(text_scores),
                visual_scores=tuple(visual_scores),
                chosen_text=chosen_text,
                chosen_visual=chosen_visual,
            )
        )
    return node


NodeFactory = Callable[[TextVisualPair, TextVisualPair, int, int], InfillingNode]


def recurse_gap(
    prev: TextVisualPair,
    next: TextVisualPair,
    depth: int,
    policy: RecursionPolicy,
    gap_index: int,
    make_node: NodeFactory,
) -> list[InfillingNode]:
    """Shared divide step: midpoint, then both halves while depth remains."""
    node = make_node(prev, next, depth, gap_index)
    if depth + 1 <= policy.depth_limit:
        left = recurse_gap(prev, node.pair, depth + 1, policy, gap_index, make_node)
        right = recurse_gap(node.pair, next, depth + 1, policy, gap_index, make_node)
        return left + [node] + right
    return [node]


def rec_gen(
    prev: TextVisualPair,
    next: TextVisualPair,
    depth: int,
    policy: RecursionPolicy,
    foveation: Foveation,
    gateway: ModelGateway,
    templates: TemplateSet,
    exemplars: str,
    settings: EngineSettings = EngineSettings(),
    gap_index: int = 0,
    collect: list | None = None,
) -> list[InfillingNode]:
    """Fill one gap recursively; the result is the recursion tree in-order."""
    if depth < 1:
        raise InputError("recursion starts at depth 1")

    def make_node(p: TextVisualPair, n: TextVisualPair, d: int, g: int) -> InfillingNode:
        return gen_infilling(
            GapTask(prev=p, next=n, depth=d, foveation=foveation),
            gateway,
            templates,
            exemplars,
            settings,
            gap_index=g,
            collect=collect,
        )

    return recurse_gap(prev, next, depth, policy, gap_index, make_node)


def infill_sequence(
    seq: Sequence,
    foveation: Foveation,
    policy: RecursionPolicy,
    gateway: ModelGateway,
    templates: TemplateSet,
    exemplars: str,
    settings: EngineSettings = EngineSettings(),
    collect: list | None = None,
) -> AugmentedSequence:
    """Fill every adjacent gap of the sequence; singletons pass through."""
    per_gap: list[list[InfillingNode]] = []
    for gap in range(seq.gap_count):
        try:
            per_gap.append(
                rec_gen(
                    seq.elements[gap],
                    seq.elements[gap + 1],
                    1,
                    policy,
                    foveation,
                    gateway,
                    templates,
                    exemplars,
                    settings,
                    gap_index=gap,
                    collect=collect,
                )
            )
        except VcotError as exc:
            raise InfillingError(gap, str(exc)) from exc
    return merge_gap_results(seq, per_gap)
