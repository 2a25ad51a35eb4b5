"""Backend profiles and the value types returned by gateway calls."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from ..errors import InputError

#: Endpoint designator that routes a capability to the in-process mock.
MOCK_ENDPOINT = "mock"


@dataclass(frozen=True)
class BackendProfile:
    """Identifies the model endpoints (or mocks) a run talks to.

    Each endpoint is either a full URL or the literal ``"mock"``. The
    profile id feeds every cache key, so distinct backends never share
    cached responses.
    """

    id: str
    text_endpoint: str = MOCK_ENDPOINT
    image_endpoint: str = MOCK_ENDPOINT
    caption_endpoint: str = MOCK_ENDPOINT
    embed_endpoint: str = MOCK_ENDPOINT
    default_temperature: float = 0.0
    retry_limit: int = 2
    timeout: float = 30.0
    retry_backoff: float = 0.25
    embed_dim: int | None = None
    bearer_token: str | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if not self.id:
            raise InputError("profile id is empty")
        if self.retry_limit < 0:
            raise InputError("retry_limit must be >= 0")

    @classmethod
    def mock(cls, id: str = "mock") -> "BackendProfile":
        return cls(id=id, embed_dim=64)

    def endpoint_for(self, name: str) -> str:
        return {
            "generate": self.text_endpoint,
            "image": self.image_endpoint,
            "caption": self.caption_endpoint,
            "embed": self.embed_endpoint,
        }[name]


class EmbeddingKind(str, Enum):
    TEXT = "text"
    IMAGE = "image"


@dataclass(frozen=True)
class TextGeneration:
    """One text candidate as returned by the text endpoint."""

    text: str
    token_logprobs: tuple[float, ...] | None
    temperature: float
    candidate_index: int

    def __post_init__(self) -> None:
        if self.token_logprobs is not None:
            for lp in self.token_logprobs:
                if not math.isfinite(lp) or lp > 0:
                    raise InputError(f"token logprob {lp} must be finite and <= 0")


@dataclass(frozen=True)
class Embedding:
    vector: tuple[float, ...]
    kind: EmbeddingKind

    def __post_init__(self) -> None:
        if not self.vector:
            raise InputError("embedding has no components")
        if not any(x != 0.0 for x in self.vector):
            raise InputError("embedding has zero L2 norm")

    @property
    def dim(self) -> int:
        return len(self.vector)
