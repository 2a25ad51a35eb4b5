"""`vcot-sidecar` / `python -m vcot_sidecar`: serve the inference endpoints."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import SidecarConfigError, load_sidecar_config
from .engines import EngineStartupError


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="vcot inference sidecar")
    parser.add_argument("--config", type=Path, default=None, help="TOML config file")
    parser.add_argument("--host", default=None)
    parser.add_argument("--port", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        config = load_sidecar_config(args.config)
    except SidecarConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port

    try:
        from .app import create_app

        app = create_app(config)
    except EngineStartupError as exc:
        print(f"startup error: {exc}", file=sys.stderr)
        return 2

    import uvicorn

    uvicorn.run(app, host=config.host, port=config.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
