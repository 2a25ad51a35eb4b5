"""Downstream generations over augmented sequences.

Storytelling builds the story autoregressively: each step's prompt carries
the full generated history so far plus the step's merged window. Instruction
summarization is history-free: each step sees only itself, the infillings of
its two adjacent gaps, and the shared extensive summary.
"""

from __future__ import annotations

import hashlib

from .backends.gateway import ModelGateway
from .errors import GenerationError, InputError
from .foveation import caption_for
from .model import AugmentedSequence, Foveation, MergedEntry, TaskKind
from .prompts import TemplateSet, caption_text_lines, render


def entry_caption(entry: MergedEntry, gateway: ModelGateway) -> str:
    if entry.pair.visual is None:
        return "no image"
    return caption_for(entry.pair, gateway)


def merged_projection(
    aug: AugmentedSequence, gateway: ModelGateway
) -> list[tuple[str, str]]:
    """(caption, text) for every merged entry, captioning as needed."""
    return [
        (entry_caption(entry, gateway), entry.pair.text or "")
        for entry in aug.merged
    ]


def extensive_summary(
    aug: AugmentedSequence,
    gateway: ModelGateway,
    templates: TemplateSet,
    exemplars: str,
    max_tokens: int = 512,
    seed: int = 0,
) -> tuple[str, str]:
    """One deterministic summary over the whole merged sequence.

    Returns (summary, prompt); the prompt is kept for run artifacts.
    """
    prompt = render(
        templates.extensive_summary,
        exemplars=exemplars,
        captions_and_texts=caption_text_lines(merged_projection(aug, gateway)),
    )
    summary = gateway.generate_text(
        prompt, temperature=0.0, n=1, max_tokens=max_tokens, seed=seed
    )[0].text
    if not summary.strip():
        raise GenerationError("extensive summary came back empty")
    return summary, prompt


def _window_for_step(aug: AugmentedSequence, step: int) -> list[MergedEntry]:
    """Step ``step``'s merged window: the original element plus the
    infillings of the gap that follows it (none for the last element)."""
    entries: list[MergedEntry] = []
    seen_originals = -1
    for entry in aug.merged:
        if entry.node is None:
            seen_originals += 1
        if seen_originals == step:
            entries.append(entry)
        elif seen_originals > step:
            break
    return entries


def adjacent_infillings(aug: AugmentedSequence, step: int) -> list[MergedEntry]:
    """The infilled entries of the gaps on either side of original ``step``,
    in merged order."""
    return [
        entry
        for entry in aug.merged
        if entry.node is not None and entry.node.gap_index in (step - 1, step)
    ]


def build_story(
    aug: AugmentedSequence,
    foveation: Foveation,
    exemplars: str,
    gateway: ModelGateway,
    templates: TemplateSet,
    max_tokens: int = 512,
    seed: int = 0,
    capture: list | None = None,
) -> list[str]:
    """One story step per original element, generated in order."""
    if aug.original.task is not TaskKind.STORYTELLING:
        raise InputError(f"cannot build a story from a {aug.original.task.value} sequence")
    summary, summary_prompt = extensive_summary(
        aug, gateway, templates, exemplars, max_tokens=max_tokens, seed=seed
    )
    if capture is not None:
        capture.append({"kind": "summary", "prompt": summary_prompt, "text": summary})

    story: list[str] = []
    for step in range(len(aug.original.elements)):
        window = [
            (entry_caption(e, gateway), e.pair.text or "")
            for e in _window_for_step(aug, step)
        ]
        history = "\n".join(f"{i + 1}. {s}" for i, s in enumerate(story)) or "(none yet)"
        prompt = render(
            templates.story_step,
            exemplars=exemplars,
            summary=summary,
            focus=foveation.focus,
            window=caption_text_lines(window),
            history=history,
        )
        text = gateway.generate_text(
            prompt, temperature=0.0, n=1, max_tokens=max_tokens, seed=seed
        )[0].text
        if not text.strip():
            raise GenerationError(f"story step {step} came back empty")
        if capture is not None:
            capture.append(
                {
                    "kind": "story_step",
                    "step_index": step,
                    "prompt": prompt,
                    "prompt_sha256": hashlib.sha256(prompt.encode("utf-8")).hexdigest(),
                    "text": text,
                }
            )
        story.append(text)
    return story


def summarize_instructions(
    aug: AugmentedSequence,
    foveation: Foveation,
    exemplars: str,
    gateway: ModelGateway,
    templates: TemplateSet,
    max_tokens: int = 512,
    seed: int = 0,
    capture: list | None = None,
) -> list[str]:
    """One instruction per original step; steps are prompt-independent given
    the shared summary."""
    if aug.original.task is not TaskKind.SUMMARIZATION:
        raise InputError(
            f"cannot summarize instructions from a {aug.original.task.value} sequence"
        )
    summary, summary_prompt = extensive_summary(
        aug, gateway, templates, exemplars, max_tokens=max_tokens, seed=seed
    )
    if capture is not None:
        capture.append({"kind": "summary", "prompt": summary_prompt, "text": summary})

    instructions: list[str] = []
    for step, element in enumerate(aug.original.elements):
        neighbor_entries = adjacent_infillings(aug, step)
        neighbors = (
            "\n".join(
                f"- {e.pair.text or '[' + entry_caption(e, gateway) + ']'}"
                for e in neighbor_entries
            )
            or "(none)"
        )
        prompt = render(
            templates.instruction_step,
            exemplars=exemplars,
            summary=summary,
            focus=foveation.focus,
            neighbors=neighbors,
            step=element.text or "",
        )
        text = gateway.generate_text(
            prompt, temperature=0.0, n=1, max_tokens=max_tokens, seed=seed
        )[0].text
        if not text.strip():
            raise GenerationError(f"instruction step {step} came back empty")
        if capture is not None:
            capture.append(
                {
                    "kind": "instruction_step",
                    "step_index": step,
                    "prompt": prompt,
                    "prompt_sha256": hashlib.sha256(prompt.encode("utf-8")).hexdigest(),
                    "text": text,
                }
            )
        instructions.append(text)
    return instructions
