"""Model engines behind the four endpoints.

The procedural engines need no checkpoints: they compute deterministically
from the request content (pixel statistics for embeddings and captions,
seeded synthesis for images and text) while honoring every wire-contract
property: unit-norm embeddings of a declared fixed dimension, non-empty
captions, logprob arrays aligned to token counts, valid PNG payloads.

Real models plug in through the same interfaces: a CLIP embedder
(sentence-transformers), a captioning pipeline (transformers), and a
hosted-API proxy for text generation. Their imports stay inside the
constructors so the default configuration runs without heavy dependencies;
a missing or broken checkpoint surfaces as EngineStartupError.
"""

from __future__ import annotations

import hashlib
import io
import math
import os
import random
import threading

from PIL import Image, UnidentifiedImageError


class EngineError(Exception):
    """A request could not be served by the engine."""


class BadRequestError(EngineError):
    """The request payload itself is unusable."""


class EngineStartupError(Exception):
    """An engine could not be constructed (missing model, bad config)."""


def decode_png(data: bytes) -> Image.Image:
    if not data:
        raise BadRequestError("empty image payload")
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
        return img.convert("RGB")
    except UnidentifiedImageError as exc:
        raise BadRequestError("payload does not decode as an image") from exc


def rgb_pixels(img: Image.Image) -> list[tuple[int, int, int]]:
    raw = img.tobytes()
    return [(raw[i], raw[i + 1], raw[i + 2]) for i in range(0, len(raw), 3)]


def _seed_rng(*parts: object) -> random.Random:
    material = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return random.Random(int.from_bytes(hashlib.sha256(material).digest()[:8], "big"))


# ---------------------------------------------------------------------------
# text generation

_VOCAB = (
    "the a then next after carefully slowly gather prepare place turn mix "
    "meanwhile finally river light tool step surface edge corner piece water "
    "warm cool fold press lift check again together toward around"
).split()


class ProceduralTextEngine:
    """Seeded sampler over a small vocabulary.

    Tokens are whitespace-separated words; when logprobs are requested the
    array carries exactly one (negative, finite) value per emitted token.
    """

    serialize = False

    def generate(
        self,
        prompt: str,
        temperature: float,
        n: int,
        max_tokens: int,
        logprobs: bool,
        seed: int,
    ) -> list[dict]:
        choices = []
        for k in range(n):
            rng = _seed_rng("text", prompt, f"{temperature:.4f}", seed, k)
            spread = 1 + int(temperature * 6)
            count = max(1, min(max_tokens, 6 + rng.randrange(4 + spread) + k))
            words = [rng.choice(_VOCAB) for _ in range(count)]
            text = " ".join(words)
            lps = (
                [-(0.05 + 0.6 * rng.random()) for _ in range(len(text.split()))]
                if logprobs
                else None
            )
            choices.append({"text": text, "token_logprobs": lps})
        return choices


class ProxyTextEngine:
    """Forwards text generation to a hosted completions API."""

    serialize = False

    def __init__(self, base_url: str | None, api_key_env: str, model: str | None):
        if not base_url or not model:
            raise EngineStartupError("proxy engine needs proxy.base_url and proxy.model")
        import httpx

        headers = {}
        api_key = os.environ.get(api_key_env)
        if api_key:
            headers["authorization"] = f"Bearer {api_key}"
        self._client = httpx.Client(base_url=base_url, headers=headers, timeout=60.0)
        self._model = model

    def generate(self, prompt, temperature, n, max_tokens, logprobs, seed) -> list[dict]:
        response = self._client.post(
            "/completions",
            json={
                "model": self._model,
                "prompt": prompt,
                "temperature": temperature,
                "n": n,
                "max_tokens": max_tokens,
                "logprobs": 1 if logprobs else None,
                "seed": seed,
            },
        )
        if response.status_code != 200:
            raise EngineError(f"upstream returned {response.status_code}: {response.text[:200]}")
        choices = []
        for choice in response.json().get("choices", []):
            lps = None
            if logprobs and choice.get("logprobs"):
                lps = [min(lp, 0.0) for lp in choice["logprobs"].get("token_logprobs", []) if lp is not None]
            choices.append({"text": choice.get("text", ""), "token_logprobs": lps})
        if len(choices) != n:
            raise EngineError(f"upstream returned {len(choices)} choices, wanted {n}")
        return choices


# ---------------------------------------------------------------------------
# embeddings

_TRIGRAM_SPAN = 3


class PixelEmbedEngine:
    """Deterministic featurizer with a declared fixed dimension.

    Images embed as downsampled pixels plus a coarse color histogram; text
    embeds as hashed character trigram counts. All vectors are L2-normalized.
    """

    serialize = False

    def __init__(self, dim: int = 256):
        # last 64 slots hold the color histogram, the rest the pixel grid
        if dim < 80:
            raise EngineStartupError("embed dim must be at least 80")
        self.dim = dim

    def _normalize(self, vec: list[float]) -> list[float]:
        norm = math.sqrt(sum(x * x for x in vec))
        if norm == 0.0:
            vec[0] = 1.0
            return vec
        return [x / norm for x in vec]

    def embed_text(self, text: str) -> list[float]:
        vec = [0.0] * self.dim
        cleaned = f"  {text.lower().strip()}  "
        for i in range(len(cleaned) - _TRIGRAM_SPAN + 1):
            gram = cleaned[i : i + _TRIGRAM_SPAN]
            digest = hashlib.sha256(gram.encode("utf-8")).digest()
            vec[int.from_bytes(digest[:4], "big") % self.dim] += 1.0
        return self._normalize(vec)

    def embed_image(self, data: bytes) -> list[float]:
        img = decode_png(data).resize((8, 8))
        vec = [0.0] * self.dim
        pixels = rgb_pixels(img)
        slots = self.dim - 64
        for i, (r, g, b) in enumerate(pixels):
            vec[(3 * i) % slots] += r / 255.0
            vec[(3 * i + 1) % slots] += g / 255.0
            vec[(3 * i + 2) % slots] += b / 255.0
        for r, g, b in pixels:  # 4x4x4 color histogram in the top 64 slots
            bucket = (r // 64) * 16 + (g // 64) * 4 + (b // 64)
            vec[slots + bucket] += 1.0 / len(pixels)
        return self._normalize(vec)


class ClipEmbedEngine:
    """CLIP text/image embeddings via sentence-transformers."""

    serialize = True

    def __init__(self, model_name: str, device: str = "cpu"):
        try:
            from sentence_transformers import SentenceTransformer

            self._model = SentenceTransformer(model_name, device=device)
        except Exception as exc:  # import error, download error, bad checkpoint
            raise EngineStartupError(f"cannot load CLIP model {model_name!r}: {exc}") from exc
        probe = self._model.encode(["probe"], normalize_embeddings=True)
        self.dim = int(probe.shape[1])

    def embed_text(self, text: str) -> list[float]:
        return self._model.encode([text], normalize_embeddings=True)[0].tolist()

    def embed_image(self, data: bytes) -> list[float]:
        return self._model.encode([decode_png(data)], normalize_embeddings=True)[0].tolist()


# ---------------------------------------------------------------------------
# captions

_COLOR_NAMES = [
    ((0, 0, 0), "black"),
    ((255, 255, 255), "white"),
    ((128, 128, 128), "gray"),
    ((200, 40, 40), "red"),
    ((230, 150, 60), "orange"),
    ((220, 210, 80), "yellow"),
    ((60, 160, 70), "green"),
    ((70, 120, 220), "blue"),
    ((130, 70, 180), "purple"),
    ((140, 100, 60), "brown"),
]


class PixelCaptionEngine:
    """Describes an image from its pixels: size class, brightness, and the
    nearest palette color of its mean. Always non-empty."""

    serialize = False

    def caption(self, data: bytes) -> str:
        img = decode_png(data)
        pixels = rgb_pixels(img.resize((8, 8)))
        mean = tuple(sum(channel) / len(pixels) for channel in zip(*pixels))
        name = min(
            _COLOR_NAMES,
            key=lambda item: sum((a - b) ** 2 for a, b in zip(item[0], mean)),
        )[1]
        brightness = sum(mean) / 3.0
        tone = "dark" if brightness < 85 else "bright" if brightness > 170 else "muted"
        size = "small" if max(img.size) <= 64 else "large"
        return f"a {size} {tone} image, mostly {name}"


class TransformersCaptionEngine:
    """Image captioning via a transformers image-to-text pipeline."""

    serialize = True

    def __init__(self, model_name: str, device: str = "cpu"):
        try:
            from transformers import pipeline

            self._pipe = pipeline("image-to-text", model=model_name, device=device)
        except Exception as exc:
            raise EngineStartupError(
                f"cannot load caption model {model_name!r}: {exc}"
            ) from exc

    def caption(self, data: bytes) -> str:
        result = self._pipe(decode_png(data))
        text = (result[0].get("generated_text") or "").strip()
        if not text:
            raise EngineError("caption model returned empty text")
        return text


# ---------------------------------------------------------------------------
# image generation


class ProceduralImageEngine:
    """Prompt-seeded 32x32 gradients with per-pixel noise; valid PNG bytes."""

    serialize = False

    size = 32

    def generate(self, prompt: str, n: int, seed: int) -> list[bytes]:
        images = []
        for k in range(n):
            rng = _seed_rng("image", prompt, seed, k)
            top = [rng.randrange(256) for _ in range(3)]
            bottom = [rng.randrange(256) for _ in range(3)]
            img = Image.new("RGB", (self.size, self.size))
            put = img.putpixel
            for y in range(self.size):
                t = y / (self.size - 1)
                base = [round(a + (b - a) * t) for a, b in zip(top, bottom)]
                for x in range(self.size):
                    noise = rng.randrange(-12, 13)
                    put(
                        (x, y),
                        tuple(max(0, min(255, c + noise)) for c in base),
                    )
            buf = io.BytesIO()
            img.save(buf, format="PNG")
            images.append(buf.getvalue())
        return images


# ---------------------------------------------------------------------------
# assembly


class EngineSet:
    """The four engines plus per-engine serialization locks."""

    def __init__(self, text, embed, caption, image):
        self.text = text
        self.embed = embed
        self.caption = caption
        self.image = image
        self._locks = {
            id(engine): threading.Lock()
            for engine in (text, embed, caption, image)
            if getattr(engine, "serialize", False)
        }

    def lock_for(self, engine):
        lock = self._locks.get(id(engine))
        if lock is not None:
            return lock
        return _NULL_LOCK


class _NullLock:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


_NULL_LOCK = _NullLock()


def build_engines(config) -> EngineSet:
    """Construct the configured engines; any failure is a startup error."""
    if config.generate_engine == "procedural":
        text = ProceduralTextEngine()
    elif config.generate_engine == "proxy":
        text = ProxyTextEngine(config.proxy_base_url, config.proxy_api_key_env, config.proxy_model)
    else:
        raise EngineStartupError(f"unknown generate engine {config.generate_engine!r}")

    if config.embed_engine == "procedural":
        embed = PixelEmbedEngine(dim=config.embed_dim)
    elif config.embed_engine == "clip":
        embed = ClipEmbedEngine(config.clip_model, config.device)
    else:
        raise EngineStartupError(f"unknown embed engine {config.embed_engine!r}")

    if config.caption_engine == "procedural":
        caption = PixelCaptionEngine()
    elif config.caption_engine == "transformers":
        caption = TransformersCaptionEngine(config.caption_model, config.device)
    else:
        raise EngineStartupError(f"unknown caption engine {config.caption_engine!r}")

    if config.image_engine == "procedural":
        image = ProceduralImageEngine()
    else:
        raise EngineStartupError(f"unknown image engine {config.image_engine!r}")

    return EngineSet(text=text, embed=embed, caption=caption, image=image)
