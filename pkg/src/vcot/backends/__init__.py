"""Uniform access to the four model capabilities: text, image, caption, embed."""

from .cache import ResponseCache, cached_call
from .gateway import ModelGateway, build_service
from .http import HttpModelService
from .mock import MockModelService
from .profile import BackendProfile, Embedding, TextGeneration
from .similarity import cosine
from .wire import (
    CAPTION,
    EMBED,
    GENERATE,
    IMAGE,
    WIRE_ENDPOINTS,
    canonical_json,
)

__all__ = [
    "BackendProfile",
    "CAPTION",
    "EMBED",
    "Embedding",
    "GENERATE",
    "HttpModelService",
    "IMAGE",
    "MockModelService",
    "ModelGateway",
    "ResponseCache",
    "TextGeneration",
    "WIRE_ENDPOINTS",
    "build_service",
    "cached_call",
    "canonical_json",
    "cosine",
]
