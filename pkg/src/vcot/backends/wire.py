"""Wire contract for the four model endpoints.

All bodies are UTF-8 JSON. Requests are serialized canonically (sorted keys,
no insignificant whitespace) so identical calls always produce identical
bytes; the golden request fixtures in the test suite pin this byte-exactly.

    POST /v1/generate  {"prompt","temperature","n","max_tokens","logprobs","seed"}
                       -> {"choices":[{"text", "token_logprobs"|null}]}
    POST /v1/image     {"prompt","n","seed"}        -> {"images":[{"png_base64"}]}
    POST /v1/caption   {"png_base64"}               -> {"caption"}
    POST /v1/embed     {"inputs":[{"kind":"text","text"}|
                                  {"kind":"image","png_base64"}]}
                       -> {"dim", "embeddings":[[...]]}
"""

from __future__ import annotations

import json
import math
from typing import Any

from ..errors import ProtocolError

GENERATE = "generate"
IMAGE = "image"
CAPTION = "caption"
EMBED = "embed"
WIRE_ENDPOINTS = (GENERATE, IMAGE, CAPTION, EMBED)

#: Path each endpoint name lives under on an HTTP service.
ENDPOINT_PATHS = {
    GENERATE: "/v1/generate",
    IMAGE: "/v1/image",
    CAPTION: "/v1/caption",
    EMBED: "/v1/embed",
}


def canonical_json(obj: Any) -> bytes:
    """Canonical UTF-8 JSON: sorted keys, compact separators."""
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def generate_request(
    prompt: str,
    temperature: float,
    n: int,
    max_tokens: int,
    logprobs: bool,
    seed: int,
) -> dict:
    return {
        "prompt": prompt,
        "temperature": float(temperature),
        "n": int(n),
        "max_tokens": int(max_tokens),
        "logprobs": bool(logprobs),
        "seed": int(seed),
    }


def image_request(prompt: str, n: int, seed: int) -> dict:
    return {"prompt": prompt, "n": int(n), "seed": int(seed)}


def caption_request(png_base64: str) -> dict:
    return {"png_base64": png_base64}


def embed_request(inputs: list[dict]) -> dict:
    return {"inputs": inputs}


def _require(response: dict, key: str, endpoint: str) -> Any:
    if not isinstance(response, dict) or key not in response:
        raise ProtocolError(f"{endpoint} response missing {key!r}: {response!r}")
    return response[key]


def validate_generate_response(response: dict, n: int) -> list[dict]:
    choices = _require(response, "choices", GENERATE)
    if not isinstance(choices, list) or len(choices) != n:
        raise ProtocolError(f"expected {n} choices, got {choices!r}")
    for choice in choices:
        text = _require(choice, "text", GENERATE)
        if not isinstance(text, str):
            raise ProtocolError(f"choice text is not a string: {text!r}")
        logprobs = choice.get("token_logprobs")
        if logprobs is not None:
            for lp in logprobs:
                if not isinstance(lp, (int, float)) or not math.isfinite(lp) or lp > 0:
                    raise ProtocolError(f"bad token logprob {lp!r}")
    return choices


def validate_image_response(response: dict, n: int) -> list[dict]:
    images = _require(response, "images", IMAGE)
    if not isinstance(images, list) or len(images) != n:
        raise ProtocolError(f"expected {n} images, got {len(images) if isinstance(images, list) else images!r}")
    for image in images:
        b64 = _require(image, "png_base64", IMAGE)
        if not isinstance(b64, str) or not b64:
            raise ProtocolError("image payload is empty")
    return images


def validate_caption_response(response: dict) -> str:
    caption = _require(response, "caption", CAPTION)
    if not isinstance(caption, str) or not caption.strip():
        raise ProtocolError("caption service returned an empty caption")
    return caption


def validate_embed_response(
    response: dict, count: int, expected_dim: int | None = None
) -> tuple[int, list[list[float]]]:
    dim = _require(response, "dim", EMBED)
    vectors = _require(response, "embeddings", EMBED)
    if not isinstance(vectors, list) or len(vectors) != count:
        raise ProtocolError(f"expected {count} embeddings, got {vectors!r}")
    if expected_dim is not None and dim != expected_dim:
        raise ProtocolError(f"declared dim {dim} != profile dim {expected_dim}")
    for vec in vectors:
        if len(vec) != dim:
            raise ProtocolError(
                f"embedding dimension {len(vec)} != declared dim {dim}"
            )
    return dim, vectors
