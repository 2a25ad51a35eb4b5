"""Typed facade over a wire-level model service, with caching and counters."""

from __future__ import annotations

import base64
import threading
from typing import Protocol, Sequence

from ..errors import InputError
from ..model import SourceKind, VisualAsset
from . import wire
from .cache import ResponseCache, cached_call
from .http import HttpModelService
from .mock import MockModelService
from .profile import MOCK_ENDPOINT, BackendProfile, Embedding, EmbeddingKind, TextGeneration

#: Items accepted by :meth:`ModelGateway.embed`.
EmbedItem = tuple[str, "str | VisualAsset"]


class ModelService(Protocol):
    def handle(self, endpoint: str, request: dict) -> dict: ...


class _Router:
    """Dispatches each endpoint name to its own service."""

    def __init__(self, routes: dict[str, ModelService]):
        self._routes = routes

    def handle(self, endpoint: str, request: dict) -> dict:
        return self._routes[endpoint].handle(endpoint, request)


def build_service(
    profile: BackendProfile, mock: MockModelService | None = None
) -> ModelService:
    """Resolve a profile's endpoint designators into a concrete service."""
    designators = {name: profile.endpoint_for(name) for name in wire.WIRE_ENDPOINTS}
    if all(v == MOCK_ENDPOINT for v in designators.values()):
        return mock or MockModelService()
    if all(v != MOCK_ENDPOINT for v in designators.values()):
        return HttpModelService(profile)
    shared_mock = mock or MockModelService()
    http = HttpModelService(profile)
    return _Router(
        {
            name: (shared_mock if designator == MOCK_ENDPOINT else http)
            for name, designator in designators.items()
        }
    )


class ModelGateway:
    """The four model capabilities behind one object.

    Every call is routed through the response cache when one is attached;
    ``backend_calls`` counts only the requests that actually reached the
    underlying service.
    """

    def __init__(
        self,
        profile: BackendProfile,
        service: ModelService | None = None,
        cache: ResponseCache | None = None,
    ):
        self.profile = profile
        self.service = service if service is not None else build_service(profile)
        self.cache = cache
        self._lock = threading.Lock()
        self.backend_calls: dict[str, int] = {name: 0 for name in wire.WIRE_ENDPOINTS}

    @property
    def total_backend_calls(self) -> int:
        with self._lock:
            return sum(self.backend_calls.values())

    def _call(self, endpoint: str, request: dict) -> dict:
        def fetch() -> dict:
            with self._lock:
                self.backend_calls[endpoint] += 1
            return self.service.handle(endpoint, request)

        return cached_call(self.cache, self.profile.id, endpoint, request, fetch)

    def generate_text(
        self,
        prompt: str,
        temperature: float,
        n: int,
        want_logprobs: bool = False,
        max_tokens: int = 256,
        seed: int = 0,
    ) -> list[TextGeneration]:
        if n < 1:
            raise InputError("n must be >= 1")
        if temperature < 0:
            raise InputError("temperature must be >= 0")
        request = wire.generate_request(prompt, temperature, n, max_tokens, want_logprobs, seed)
        choices = wire.validate_generate_response(self._call(wire.GENERATE, request), n)
        return [
            TextGeneration(
                text=choice["text"],
                token_logprobs=(
                    tuple(choice["token_logprobs"])
                    if choice.get("token_logprobs") is not None
                    else None
                ),
                temperature=temperature,
                candidate_index=i,
            )
            for i, choice in enumerate(choices)
        ]

    def generate_image(self, prompt: str, n: int, seed: int = 0) -> list[VisualAsset]:
        if n < 1:
            raise InputError("n must be >= 1")
        request = wire.image_request(prompt, n, seed)
        images = wire.validate_image_response(self._call(wire.IMAGE, request), n)
        return [
            VisualAsset.from_png(
                base64.b64decode(image["png_base64"]), SourceKind.GENERATED, prompt
            )
            for image in images
        ]

    def caption_image(self, asset: VisualAsset) -> str:
        if not asset.png_bytes:
            raise InputError("cannot caption an asset with no bytes")
        request = wire.caption_request(base64.b64encode(asset.png_bytes).decode("ascii"))
        return wire.validate_caption_response(self._call(wire.CAPTION, request))

    def embed(self, items: Sequence[EmbedItem]) -> list[Embedding]:
        if not items:
            raise InputError("embed needs at least one item")
        inputs = []
        kinds = []
        for kind, payload in items:
            if kind == "text":
                inputs.append({"kind": "text", "text": payload})
                kinds.append(EmbeddingKind.TEXT)
            elif kind == "image":
                if not isinstance(payload, VisualAsset):
                    raise InputError("image items must carry a VisualAsset")
                inputs.append(
                    {
                        "kind": "image",
                        "png_base64": base64.b64encode(payload.png_bytes).decode("ascii"),
                    }
                )
                kinds.append(EmbeddingKind.IMAGE)
            else:
                raise InputError(f"unknown embed kind {kind!r}")
        request = wire.embed_request(inputs)
        _, vectors = wire.validate_embed_response(
            self._call(wire.EMBED, request), len(items), self.profile.embed_dim
        )
        return [
            Embedding(vector=tuple(vec), kind=kind) for vec, kind in zip(vectors, kinds)
        ]

    def embed_one(self, kind: str, payload: "str | VisualAsset") -> Embedding:
        return self.embed([(kind, payload)])[0]
