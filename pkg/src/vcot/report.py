"""Run report rendering: one ordered gallery per sequence and method."""

from __future__ import annotations

import html

from .config import RunConfig


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value).replace("|", "\\|").replace("\n", " ")


def render_markdown_report(config: RunConfig, outcomes: list) -> str:
    lines = [
        "# Run report",
        "",
        f"- format: {config.format}",
        f"- backend: {config.backend}",
        f"- depth limit: {config.depth}",
        f"- seed: {config.seed}",
        "",
    ]
    for outcome in outcomes:
        title = f"## Sequence `{outcome.sequence_id}`"
        if outcome.task:
            title += f" ({outcome.task})"
        lines.append(title)
        lines.append("")
        if outcome.error is not None:
            lines.append(f"**FAILED**: {_cell(outcome.error)}")
            lines.append("")
            continue
        if outcome.focus:
            lines.append(f"Focus: {_cell(outcome.focus)}")
            lines.append("")
        for method, rows in outcome.method_views:
            lines.append(f"### {method}")
            lines.append("")
            lines.append(
                "| # | kind | gap | depth | text | caption | text score | visual score | image |"
            )
            lines.append("| ---: | --- | ---: | ---: | --- | --- | ---: | ---: | --- |")
            for i, row in enumerate(rows):
                image = f"assets/{row['asset_id']}.png" if row["asset_id"] else ""
                lines.append(
                    f"| {i + 1} | {row['kind']} | {_cell(row['gap_index'])} "
                    f"| {_cell(row['depth'])} | {_cell(row['text'])} "
                    f"| {_cell(row['caption'])} | {_cell(row['text_score'])} "
                    f"| {_cell(row['visual_score'])} | {image} |"
                )
            lines.append("")
            steps = outcome.downstream.get(method)
            if steps:
                lines.append(f"Downstream output ({outcome.task}):")
                lines.append("")
                for i, step in enumerate(steps):
                    lines.append(f"{i + 1}. {_cell(step)}")
                lines.append("")
    return "\n".join(lines) + "\n"


def render_html_report(config: RunConfig, outcomes: list) -> str:
    parts = [
        "<!doctype html>",
        "<html><head><meta charset='utf-8'><title>Run report</title>",
        "<style>table{border-collapse:collapse}td,th{border:1px solid #999;"
        "padding:4px;font-family:sans-serif;font-size:13px}img{height:48px}</style>",
        "</head><body>",
        "<h1>Run report</h1>",
        f"<p>format: {html.escape(config.format)} | backend: {html.escape(config.backend)}"
        f" | depth limit: {config.depth} | seed: {config.seed}</p>",
    ]
    for outcome in outcomes:
        parts.append(
            f"<h2>Sequence {html.escape(outcome.sequence_id)}"
            + (f" ({html.escape(outcome.task)})" if outcome.task else "")
            + "</h2>"
        )
        if outcome.error is not None:
            parts.append(f"<p><b>FAILED</b>: {html.escape(outcome.error)}</p>")
            continue
        if outcome.focus:
            parts.append(f"<p>Focus: {html.escape(outcome.focus)}</p>")
        for method, rows in outcome.method_views:
            parts.append(f"<h3>{html.escape(method)}</h3>")
            parts.append(
                "<table><tr><th>#</th><th>kind</th><th>gap</th><th>depth</th>"
                "<th>text</th><th>caption</th><th>text score</th>"
                "<th>visual score</th><th>image</th></tr>"
            )
            for i, row in enumerate(rows):
                image = (
                    f"<img src='assets/{row['asset_id']}.png' alt=''>"
                    if row["asset_id"]
                    else ""
                )

                def esc(value):
                    if value is None:
                        return ""
                    if isinstance(value, float):
                        return f"{value:.4f}"
                    return html.escape(str(value))

                parts.append(
                    f"<tr><td>{i + 1}</td><td>{row['kind']}</td>"
                    f"<td>{esc(row['gap_index'])}</td><td>{esc(row['depth'])}</td>"
                    f"<td>{esc(row['text'])}</td><td>{esc(row['caption'])}</td>"
                    f"<td>{esc(row['text_score'])}</td><td>{esc(row['visual_score'])}</td>"
                    f"<td>{image}</td></tr>"
                )
            parts.append("</table>")
            steps = outcome.downstream.get(method)
            if steps:
                parts.append("<ol>")
                for step in steps:
                    parts.append(f"<li>{html.escape(step)}</li>")
                parts.append("</ol>")
    parts.append("</body></html>")
    return "\n".join(parts) + "\n"
