"""Multipoint foveation: summarize the whole sequence, keep the most likely
summary, and extract the recurring focus that grounds all infillings."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .backends.gateway import ModelGateway
from .backends.similarity import argmax_lowest_tie
from .errors import DegenerateFoveationError, GenerationError, InputError, ProtocolError
from .model import Foveation, Sequence, TextVisualPair
from .prompts import TemplateSet, caption_text_lines, render


def caption_for(pair: TextVisualPair, gateway: ModelGateway) -> str:
    """The pair's caption, captioning its visual on first use (memoized)."""
    if pair.caption is not None:
        return pair.caption
    if pair.visual is None:
        raise InputError("pair has neither caption nor visual to caption")
    pair.caption = gateway.caption_image(pair.visual)
    return pair.caption


def project_to_text(seq: Sequence, gateway: ModelGateway) -> list[tuple[str, str]]:
    """Project every element to (caption, text), preserving order."""
    if not seq.elements:
        raise InputError("cannot project an empty sequence")
    projected = []
    for pair in seq.elements:
        projected.append((caption_for(pair, gateway), pair.text or ""))
    return projected


def joint_log_likelihood(token_logprobs: "list[float] | tuple[float, ...]") -> float:
    """Sum of per-token log probabilities; the empty product has log 0.0."""
    total = 0.0
    for lp in token_logprobs:
        if not math.isfinite(lp) or lp > 0:
            raise InputError(f"token logprob {lp!r} must be finite and <= 0")
        total += lp
    return total


@dataclass(frozen=True)
class SummaryCandidate:
    text: str
    token_logprobs: tuple[float, ...]
    loglik: float


def multipoint_foveation(
    seq: Sequence,
    exemplars: str,
    n_summaries: int,
    gateway: ModelGateway,
    templates: TemplateSet,
    *,
    summary_temperature: float = 0.0,
    focus_temperature: float = 0.0,
    max_tokens: int = 512,
    seed: int = 0,
    capture: list | None = None,
) -> Foveation:
    """Compute the sequence's foveation.

    Candidate summaries are requested in one batch with token logprobs and
    ranked by joint log-likelihood (ties to the lowest index); the focus is
    then extracted from the winner by a second, deterministic prompt. When
    ``capture`` is given, the scored candidates and the selected index are
    appended for run-artifact auditing.
    """
    if n_summaries < 1:
        raise InputError("n_summaries must be >= 1")
    projection = project_to_text(seq, gateway)
    prompt = render(
        templates.foveation_summary,
        exemplars=exemplars,
        captions_and_texts=caption_text_lines(projection),
    )
    generations = gateway.generate_text(
        prompt,
        temperature=summary_temperature,
        n=n_summaries,
        want_logprobs=True,
        max_tokens=max_tokens,
        seed=seed,
    )
    candidates = []
    for gen in generations:
        if gen.token_logprobs is None:
            raise ProtocolError("summary generation returned no token logprobs")
        candidates.append(
            SummaryCandidate(
                text=gen.text,
                token_logprobs=gen.token_logprobs,
                loglik=joint_log_likelihood(gen.token_logprobs),
            )
        )
    best = argmax_lowest_tie([c.loglik for c in candidates])
    summary = candidates[best].text
    if not summary.strip():
        raise GenerationError("selected summary is empty")

    focus_prompt = render(templates.foveation_focus, summary=summary)
    focus = gateway.generate_text(
        focus_prompt,
        temperature=focus_temperature,
        n=1,
        max_tokens=64,
        seed=seed,
    )[0].text.strip()
    if not focus:
        raise DegenerateFoveationError("focus extraction returned an empty line")

    if capture is not None:
        capture.append({"candidates": candidates, "selected_index": best})
    return Foveation(focus=focus, summary=summary, summary_loglik=candidates[best].loglik)
