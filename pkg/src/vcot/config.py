"""Run configuration: TOML file plus CLI overrides (flags win)."""

from __future__ import annotations

import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .backends.profile import BackendProfile
from .errors import InputError

API_KEY_ENV = "VCOT_API_KEY"


@dataclass
class GenerationSettings:
    """Candidate counts and token budgets. The max_tokens values are
    tunables with no canonical setting; they are recorded in every run's
    config snapshot."""

    text_candidates: int = 5
    image_candidates: int = 4
    unify_candidates: int = 4
    summary_candidates: int = 3
    candidate_temperature: float = 0.5
    summary_temperature: float = 0.0
    max_tokens_infilling: int = 256
    max_tokens_summary: int = 512
    neighbor_aggregate: str = "mean"  # or "min"
    text_anchor: str = "text"  # or "visual"


@dataclass
class RunConfig:
    dataset: Path | None = None
    format: str = "vist"
    out: Path = Path("runs/latest")
    seed: int = 0
    depth: int = 2
    backend: str = "mock"
    baselines: tuple[str, ...] = ()
    no_infill: bool = False
    workers: int = 4
    templates_dir: Path | None = None
    generation: GenerationSettings = field(default_factory=GenerationSettings)
    profiles: dict[str, BackendProfile] = field(default_factory=dict)

    def resolve_profile(self) -> BackendProfile:
        if self.backend == "mock":
            return BackendProfile.mock()
        profile = self.profiles.get(self.backend)
        if profile is None:
            raise InputError(
                f"backend {self.backend!r} is not a configured profile "
                f"(known: {sorted(self.profiles)})"
            )
        return profile

    def snapshot(self) -> dict:
        """JSON-ready view of the effective configuration."""
        data = {
            "dataset": str(self.dataset) if self.dataset else None,
            "format": self.format,
            "seed": self.seed,
            "depth": self.depth,
            "backend": self.backend,
            "baselines": list(self.baselines),
            "no_infill": self.no_infill,
            "workers": self.workers,
            "generation": asdict(self.generation),
        }
        return data


def _build_profile(name: str, section: dict) -> BackendProfile:
    known = {f.name for f in fields(BackendProfile)}
    unknown = set(section) - known
    if unknown:
        raise InputError(f"profile {name!r} has unknown keys: {sorted(unknown)}")
    return BackendProfile(
        id=name, bearer_token=os.environ.get(API_KEY_ENV), **section
    )


def load_config(path: Path | None, overrides: dict | None = None) -> RunConfig:
    """Build the effective RunConfig from an optional TOML file and CLI
    overrides; overrides always win over file values."""
    config = RunConfig()
    if path is not None:
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise InputError(f"cannot read config {path}: {exc}") from exc

        base = Path(path).parent

        def rooted(value) -> Path:
            # paths in the file resolve relative to the file itself
            p = Path(value)
            return p if p.is_absolute() else base / p

        run = raw.get("run", {})
        for key in ("format", "seed", "depth", "backend", "no_infill", "workers"):
            if key in run:
                setattr(config, key, run[key])
        for key in ("dataset", "out", "templates_dir"):
            if key in run:
                setattr(config, key, rooted(run[key]))
        if "baselines" in run:
            config.baselines = tuple(run["baselines"])
        gen = raw.get("generation", {})
        known = {f.name for f in fields(GenerationSettings)}
        unknown = set(gen) - known
        if unknown:
            raise InputError(f"[generation] has unknown keys: {sorted(unknown)}")
        config.generation = GenerationSettings(**gen)
        for name, section in raw.get("profiles", {}).items():
            config.profiles[name] = _build_profile(name, section)

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in ("text_candidates", "image_candidates"):
            setattr(config.generation, key, value)
        elif key == "baselines":
            config.baselines = tuple(
                item.strip() for item in value.split(",") if item.strip()
            )
        elif key in ("dataset", "out", "templates_dir"):
            setattr(config, key, Path(value))
        else:
            setattr(config, key, value)

    if config.dataset is not None:
        config.dataset = Path(config.dataset)
    if config.templates_dir is not None:
        config.templates_dir = Path(config.templates_dir)
    config.out = Path(config.out)
    return config
