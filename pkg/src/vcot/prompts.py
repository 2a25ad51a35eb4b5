"""Loading and rendering of the prompt template files.

Templates are plain UTF-8 text files with named ``{placeholder}`` slots,
shipped inside the package and overridable via a directory of files with
the same names. Prompt wording is data, not code: edit the files, not this
module.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib.resources import files
from pathlib import Path

from .errors import InputError
from .model import TaskKind

_TEMPLATE_NAMES = (
    "foveation_summary",
    "foveation_focus",
    "infilling",
    "cot_infilling",
    "extensive_summary",
    "story_step",
    "instruction_step",
)


def _read_packaged(relative: str) -> str:
    return (files("vcot") / "templates" / relative).read_text(encoding="utf-8")


@dataclass(frozen=True)
class TemplateSet:
    foveation_summary: str
    foveation_focus: str
    infilling: str
    cot_infilling: str
    extensive_summary: str
    story_step: str
    instruction_step: str
    exemplars: dict

    @classmethod
    def load(cls, directory: Path | None = None) -> "TemplateSet":
        """Load packaged templates, overridden file-by-file from ``directory``."""

        def read(relative: str) -> str:
            if directory is not None:
                candidate = Path(directory) / relative
                if candidate.is_file():
                    return candidate.read_text(encoding="utf-8")
            return _read_packaged(relative)

        fields = {name: read(f"{name}.txt") for name in _TEMPLATE_NAMES}
        exemplars = {
            task: read(f"exemplars/{task.value}.txt").strip() for task in TaskKind
        }
        return cls(exemplars=exemplars, **fields)

    def exemplars_for(self, task: TaskKind) -> str:
        return self.exemplars[task]


def render(template: str, **fields: str) -> str:
    """Fill a template's named placeholders; unknown slots are an error."""
    try:
        return template.format(**fields)
    except (KeyError, IndexError) as exc:
        raise InputError(f"template placeholder missing a value: {exc}") from exc


def caption_text_lines(pairs: list[tuple[str, str]]) -> str:
    """The shared one-pair-per-line rendering: ``i. [caption] text``."""
    return "\n".join(
        f"{i + 1}. [{caption}] {text}" for i, (caption, text) in enumerate(pairs)
    )
