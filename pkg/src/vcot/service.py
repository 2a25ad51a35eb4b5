"""FastAPI app exposing the model wire contract over any wire-level service.

`vcot serve` mounts this over the deterministic mocks so clients (including
this package's own HTTP gateway) can exercise the full wire path without
real models; a sidecar with genuine models implements the same routes.
"""

from __future__ import annotations

from fastapi import Depends, FastAPI, Header, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .backends.mock import MockModelService
from .backends import wire
from .errors import InputError, VcotError


class GenerateRequest(BaseModel):
    prompt: str
    temperature: float = 0.0
    n: int = Field(default=1, ge=1)
    max_tokens: int = 256
    logprobs: bool = False
    seed: int = 0


class Choice(BaseModel):
    text: str
    token_logprobs: list[float] | None = None


class GenerateResponse(BaseModel):
    choices: list[Choice]


class ImageRequest(BaseModel):
    prompt: str
    n: int = Field(default=1, ge=1)
    seed: int = 0


class ImagePayload(BaseModel):
    png_base64: str


class ImageResponse(BaseModel):
    images: list[ImagePayload]


class CaptionRequest(BaseModel):
    png_base64: str


class CaptionResponse(BaseModel):
    caption: str


class EmbedInput(BaseModel):
    kind: str
    text: str | None = None
    png_base64: str | None = None


class EmbedRequest(BaseModel):
    inputs: list[EmbedInput]


class EmbedResponse(BaseModel):
    dim: int
    embeddings: list[list[float]]


def create_app(service=None, token: str | None = None) -> FastAPI:
    """Wrap a wire-level service (default: fresh mocks) in the HTTP contract."""
    backend = service if service is not None else MockModelService()
    app = FastAPI(title="vcot model service", version="0.1.0")

    def check_auth(authorization: str | None = Header(default=None)) -> None:
        if token is None:
            return
        if authorization != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or bad bearer token")

    @app.exception_handler(VcotError)
    def _vcot_error(request, exc: VcotError):
        status = 400 if isinstance(exc, InputError) else 500
        return JSONResponse(status_code=status, content={"error": str(exc)})

    def dispatch(endpoint: str, payload: dict) -> dict:
        return backend.handle(endpoint, payload)

    @app.post("/v1/generate", response_model=GenerateResponse)
    def generate(req: GenerateRequest, _=Depends(check_auth)):
        return dispatch(wire.GENERATE, req.model_dump())

    @app.post("/v1/image", response_model=ImageResponse)
    def image(req: ImageRequest, _=Depends(check_auth)):
        return dispatch(wire.IMAGE, req.model_dump())

    @app.post("/v1/caption", response_model=CaptionResponse)
    def caption(req: CaptionRequest, _=Depends(check_auth)):
        return dispatch(wire.CAPTION, req.model_dump())

    @app.post("/v1/embed", response_model=EmbedResponse)
    def embed(req: EmbedRequest, _=Depends(check_auth)):
        payload = {
            "inputs": [item.model_dump(exclude_none=True) for item in req.inputs]
        }
        return dispatch(wire.EMBED, payload)

    return app
