"""Post-hoc verification of a run directory.

Recomputes, from the records alone: asset content hashes, every node's
selection argmax (text and visual, with the lowest-index tie rule), the
foveation candidate ranking, downstream prompt hashes, and the per-gap
node-count/depth structure implied by the configured depth limit.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .errors import InputError
from .model import inorder_depths


def _argmax_lowest(scores: list[float]) -> int:
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best


def _read_jsonl(path: Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return records


def verify_run(run_dir: Path) -> list[str]:
    """Return a list of problems; an empty list means the run checks out."""
    run_dir = Path(run_dir)
    problems: list[str] = []
    config_path = run_dir / "config.json"
    if not config_path.is_file():
        raise InputError(f"{run_dir} has no config.json; not a run directory?")
    config = json.loads(config_path.read_text(encoding="utf-8"))
    depth_limit = config["depth"]
    expected_depths = inorder_depths(depth_limit)

    # assets hash to their file names
    assets_dir = run_dir / "assets"
    if assets_dir.is_dir():
        for path in sorted(assets_dir.glob("*.png")):
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            if digest != path.stem:
                problems.append(f"asset {path.name}: content hash is {digest}")

    nodes = _read_jsonl(run_dir / "nodes.jsonl") if (run_dir / "nodes.jsonl").is_file() else []
    by_gap: dict[tuple[str, str], dict[int, list[dict]]] = {}
    for node in nodes:
        key = (node["sequence_id"], node["method"])
        by_gap.setdefault(key, {}).setdefault(node["gap_index"], []).append(node)

        label = f"node {node['sequence_id']}/{node['method']}#{node['position']}"
        if node.get("text_scores"):
            recomputed = _argmax_lowest(node["text_scores"])
            if recomputed != node["candidate_index_text"]:
                problems.append(
                    f"{label}: text argmax {recomputed} != recorded "
                    f"{node['candidate_index_text']}"
                )
            elif node["text_score"] != node["text_scores"][recomputed]:
                problems.append(f"{label}: text_score does not match its score list")
        if node.get("visual_scores"):
            recomputed = _argmax_lowest(node["visual_scores"])
            if recomputed != node["candidate_index_visual"]:
                problems.append(
                    f"{label}: visual argmax {recomputed} != recorded "
                    f"{node['candidate_index_visual']}"
                )
        if node.get("asset_id") and not (assets_dir / f"{node['asset_id']}.png").is_file():
            problems.append(f"{label}: asset {node['asset_id']} not in assets/")

    for (sequence_id, method), gaps in sorted(by_gap.items()):
        for gap_index, gap_nodes in sorted(gaps.items()):
            gap_nodes.sort(key=lambda n: n["position"])
            depths = [n["depth"] for n in gap_nodes]
            if depths != expected_depths:
                problems.append(
                    f"{sequence_id}/{method} gap {gap_index}: depth pattern {depths} "
                    f"!= expected {expected_depths}"
                )

    outputs = (
        _read_jsonl(run_dir / "outputs.jsonl")
        if (run_dir / "outputs.jsonl").is_file()
        else []
    )
    for record in outputs:
        if record["record"] == "foveation":
            logliks = []
            for candidate in record["candidates"]:
                total = sum(candidate["token_logprobs"])
                if abs(total - candidate["loglik"]) > 1e-9:
                    problems.append(
                        f"foveation {record['sequence_id']}: stored loglik "
                        f"{candidate['loglik']} != recomputed {total}"
                    )
                logliks.append(total)
            best = _argmax_lowest(logliks)
            if best != record["selected_index"]:
                problems.append(
                    f"foveation {record['sequence_id']}: argmax {best} != "
                    f"selected {record['selected_index']}"
                )
        elif record["record"] in ("story_step", "instruction_step"):
            digest = hashlib.sha256(record["prompt"].encode("utf-8")).hexdigest()
            if digest != record["prompt_sha256"]:
                problems.append(
                    f"{record['record']} {record['sequence_id']}#{record['step_index']}: "
                    "prompt hash mismatch"
                )
        elif record["record"] == "sequence":
            n = record["n_elements"]
            per_gap = 2**depth_limit - 1
            for method, counts in record["methods"].items():
                if method == "no_infilling":
                    expected = (0, n)
                else:
                    expected = (max(0, n - 1) * per_gap, n + max(0, n - 1) * per_gap)
                actual = (counts["n_infillings"], counts["merged_length"])
                if actual != expected:
                    problems.append(
                        f"sequence {record['sequence_id']}/{method}: counts {actual} "
                        f"!= expected {expected}"
                    )
    return problems
