"""Command-line entrypoints."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import click

from .config import load_config
from .errors import VcotError


@click.group()
@click.version_option(package_name="vcot")
def main() -> None:
    """Recursive multimodal infilling for sequential text-visual data."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--dataset", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--format", "format_", type=click.Choice(["vist", "wikihow", "generic"]), default=None)
@click.option("--depth", type=int, default=None, help="Recursion depth limit.")
@click.option("--text-candidates", type=int, default=None)
@click.option("--image-candidates", type=int, default=None)
@click.option("--backend", default=None, help='"mock" or a configured profile name.')
@click.option("--baselines", default=None, help="Comma-separated baseline kinds.")
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.option("--workers", type=int, default=None)
@click.option("--no-infill", "no_infill", is_flag=True, default=None,
              help="Skip generation entirely; report echoes the ingested data.")
def run(config_path, dataset, format_, depth, text_candidates, image_candidates,
        backend, baselines, seed, out, workers, no_infill) -> None:
    """Run the pipeline over a dataset and write a run directory."""
    from .pipeline import run_pipeline

    overrides = {
        "dataset": dataset,
        "format": format_,
        "depth": depth,
        "text_candidates": text_candidates,
        "image_candidates": image_candidates,
        "backend": backend,
        "baselines": baselines,
        "seed": seed,
        "out": out,
        "workers": workers,
        "no_infill": no_infill,
    }
    try:
        config = load_config(config_path, overrides)
        run_dir, stats = run_pipeline(config)
    except VcotError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"run directory: {run_dir}")
    click.echo(
        f"sequences: {stats['sequences']} ({stats['failed']} failed) | "
        f"backend calls: {stats['total_backend_calls']} | "
        f"cache hits/misses: {stats['cache']['hits']}/{stats['cache']['misses']}"
    )
    if stats["sequences"] and stats["failed"] == stats["sequences"]:
        raise click.ClickException("every sequence failed")


@main.command()
@click.option("--annotations", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def tabulate(annotations: Path, out: Path) -> None:
    """Tabulate an annotation CSV into summary.json and summary.md."""
    from .evaluation import read_annotations_csv, summarize_annotations, summary_markdown

    try:
        records = read_annotations_csv(annotations)
        summary = summarize_annotations(records)
    except VcotError as exc:
        raise click.ClickException(str(exc)) from exc
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    markdown = summary_markdown(summary)
    (out / "summary.md").write_text(markdown, encoding="utf-8")
    click.echo(markdown)
    click.echo(f"wrote {out / 'summary.json'} and {out / 'summary.md'}")


@main.command()
@click.option("--run", "run_dir", type=click.Path(exists=True, path_type=Path), required=True)
def verify(run_dir: Path) -> None:
    """Recompute hashes and selection argmaxes recorded in a run directory."""
    from .verifyrun import verify_run

    try:
        problems = verify_run(run_dir)
    except VcotError as exc:
        raise click.ClickException(str(exc)) from exc
    if problems:
        for problem in problems:
            click.echo(f"FAIL {problem}")
        raise click.ClickException(f"{len(problems)} problem(s) found")
    click.echo("OK: all recorded hashes, argmaxes, and structures check out")


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8040)
@click.option("--token", default=None, help="Require this bearer token.")
def serve(host: str, port: int, token: str | None) -> None:
    """Serve the deterministic mock models over the HTTP wire contract."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(token=token), host=host, port=port)


@main.command()
@click.option("--out", type=click.Path(path_type=Path), required=True)
def demo(out: Path) -> None:
    """Write a small demo dataset, config, and annotation CSV."""
    from .demo import write_demo

    path = write_demo(out)
    click.echo(f"demo files in {path}; try:")
    click.echo(f"  vcot run --config {path / 'config.toml'} --out {path / 'run'}")
    click.echo(f"  vcot tabulate --annotations {path / 'annotations.csv'} --out {path / 'tables'}")


if __name__ == "__main__":
    main()
