"""Sidecar configuration: which engine backs each capability."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class SidecarConfigError(Exception):
    pass


@dataclass
class SidecarConfig:
    host: str = "127.0.0.1"
    port: int = 8041
    token: str | None = None
    # engine selectors per capability
    generate_engine: str = "procedural"  # or "proxy"
    embed_engine: str = "procedural"  # or "clip"
    caption_engine: str = "procedural"  # or "transformers"
    image_engine: str = "procedural"
    embed_dim: int = 256
    # real-model settings
    clip_model: str = "clip-ViT-B-32"
    caption_model: str = "Salesforce/blip-image-captioning-base"
    device: str = "cpu"
    # hosted-API proxy for text generation
    proxy_base_url: str | None = None
    proxy_api_key_env: str = "SIDECAR_API_KEY"
    proxy_model: str | None = None


def load_sidecar_config(path: Path | None) -> SidecarConfig:
    config = SidecarConfig()
    if path is None:
        return config
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise SidecarConfigError(f"cannot read {path}: {exc}") from exc

    server = raw.get("server", {})
    config.host = server.get("host", config.host)
    config.port = server.get("port", config.port)
    config.token = server.get("token") or None

    engines = raw.get("engines", {})
    config.generate_engine = engines.get("generate", config.generate_engine)
    config.embed_engine = engines.get("embed", config.embed_engine)
    config.caption_engine = engines.get("caption", config.caption_engine)
    config.image_engine = engines.get("image", config.image_engine)

    config.embed_dim = raw.get("embed", {}).get("dim", config.embed_dim)
    clip = raw.get("clip", {})
    config.clip_model = clip.get("model", config.clip_model)
    caption = raw.get("caption_model", {})
    config.caption_model = caption.get("model", config.caption_model)
    config.device = clip.get("device", caption.get("device", config.device))

    proxy = raw.get("proxy", {})
    config.proxy_base_url = proxy.get("base_url", config.proxy_base_url)
    config.proxy_api_key_env = proxy.get("api_key_env", config.proxy_api_key_env)
    config.proxy_model = proxy.get("model", config.proxy_model)
    return config
