"""Deterministic in-process stand-ins for the four model endpoints.

The real models behind the pipeline are not available in CI, so the mocks
are specified bit-exactly; every selection oracle in the test suite can
recompute their outputs offline:

* generate: candidate ``k`` returns ``"GEN(<h8>,<temp>,<k>)"`` padded with
  ``k`` extra ``pad`` words, where ``<h8>`` is the first 8 hex chars of
  SHA-256(prompt) and ``<temp>`` is the temperature with two decimals. The
  mock token stream is the whitespace-split words, so candidate ``k`` has
  ``k + 1`` tokens; requested logprobs are ``-0.1 * (pos + 1)`` per token
  position.
* image: candidate ``k`` is a 16x16 solid-color PNG whose RGB is the first
  3 bytes of SHA-256(prompt || str(k)); the prompt is carried in a PNG text
  chunk so the wire service can recover it.
* caption: ``"a picture of "`` + the PNG's recorded prompt, or the first 8
  hex chars of its content hash when no prompt is recorded.
* embed: 64-dim bag of words. Lowercase, split on non-alphanumerics, each
  token adds 1.0 at index FNV-1a(token) mod 64, then L2-normalize. Images
  embed their recorded prompt, or their full content hash when absent.

Everything is stateless apart from an atomic call counter.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import io
import math
import re
import threading

from PIL import Image, UnidentifiedImageError
from PIL.PngImagePlugin import PngInfo

from ..errors import InputError
from . import wire

MOCK_EMBED_DIM = 64
PROMPT_CHUNK_KEY = "prompt"

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


def fnv1a32(data: bytes) -> int:
    """32-bit FNV-1a hash."""
    h = 0x811C9DC5
    for b in data:
        h ^= b
        h = (h * 0x01000193) & 0xFFFFFFFF
    return h


def bag_of_words_vector(text: str, dim: int = MOCK_EMBED_DIM) -> list[float]:
    """Unit-norm bag-of-words vector over ASCII-alphanumeric tokens."""
    tokens = [t for t in _TOKEN_SPLIT.split(text.lower()) if t]
    if not tokens:
        raise InputError(f"text {text!r} produced no tokens to embed")
    vec = [0.0] * dim
    for token in tokens:
        vec[fnv1a32(token.encode("utf-8")) % dim] += 1.0
    norm = math.sqrt(sum(x * x for x in vec))
    return [x / norm for x in vec]


def mock_text(prompt: str, temperature: float, k: int) -> str:
    h8 = hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:8]
    return f"GEN({h8},{temperature:.2f},{k})" + " pad" * k


def mock_token_logprobs(text: str) -> list[float]:
    return [-0.1 * (pos + 1) for pos in range(len(text.split()))]


def mock_image_png(prompt: str, k: int) -> bytes:
    digest = hashlib.sha256(prompt.encode("utf-8") + str(k).encode("ascii")).digest()
    img = Image.new("RGB", (16, 16), (digest[0], digest[1], digest[2]))
    meta = PngInfo()
    meta.add_text(PROMPT_CHUNK_KEY, prompt)
    buf = io.BytesIO()
    img.save(buf, format="PNG", pnginfo=meta)
    return buf.getvalue()


def _decode_png(b64: str) -> tuple[bytes, str | None]:
    """Return (raw bytes, recorded prompt or None) for a base64 PNG."""
    try:
        raw = base64.b64decode(b64, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise InputError("png_base64 is not valid base64") from exc
    if not raw:
        raise InputError("png payload is empty")
    try:
        with Image.open(io.BytesIO(raw)) as img:
            img.load()
            prompt = img.text.get(PROMPT_CHUNK_KEY) if hasattr(img, "text") else None
    except UnidentifiedImageError as exc:
        raise InputError("png payload does not decode") from exc
    return raw, prompt


class MockModelService:
    """Wire-level handler for all four endpoints with a call counter."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.calls: dict[str, int] = {name: 0 for name in wire.WIRE_ENDPOINTS}

    @property
    def total_calls(self) -> int:
        with self._lock:
            return sum(self.calls.values())

    def reset_calls(self) -> None:
        with self._lock:
            for name in self.calls:
                self.calls[name] = 0

    def handle(self, endpoint: str, request: dict) -> dict:
        with self._lock:
            self.calls[endpoint] += 1
        handler = {
            wire.GENERATE: self._generate,
            wire.IMAGE: self._image,
            wire.CAPTION: self._caption,
            wire.EMBED: self._embed,
        }[endpoint]
        return handler(request)

    def _generate(self, request: dict) -> dict:
        n = int(request["n"])
        if n < 1:
            raise InputError("n must be >= 1")
        temperature = float(request["temperature"])
        choices = []
        for k in range(n):
            text = mock_text(request["prompt"], temperature, k)
            logprobs = mock_token_logprobs(text) if request.get("logprobs") else None
            choices.append({"text": text, "token_logprobs": logprobs})
        return {"choices": choices}

    def _image(self, request: dict) -> dict:
        n = int(request["n"])
        if n < 1:
            raise InputError("n must be >= 1")
        images = []
        for k in range(n):
            png = mock_image_png(request["prompt"], k)
            images.append({"png_base64": base64.b64encode(png).decode("ascii")})
        return {"images": images}

    def _caption(self, request: dict) -> dict:
        raw, prompt = _decode_png(request["png_base64"])
        if prompt is not None:
            return {"caption": f"a picture of {prompt}"}
        return {"caption": f"a picture of {hashlib.sha256(raw).hexdigest()[:8]}"}

    def _embed(self, request: dict) -> dict:
        inputs = request["inputs"]
        if not inputs:
            raise InputError("embed needs at least one input")
        vectors = []
        for item in inputs:
            if item["kind"] == "text":
                vectors.append(bag_of_words_vector(item["text"]))
            elif item["kind"] == "image":
                raw, prompt = _decode_png(item["png_base64"])
                source = prompt if prompt is not None else hashlib.sha256(raw).hexdigest()
                vectors.append(bag_of_words_vector(source))
            else:
                raise InputError(f"unknown embed kind {item['kind']!r}")
        return {"dim": MOCK_EMBED_DIM, "embeddings": vectors}
