"""The sidecar HTTP app: the four model endpoints of the vcot wire contract.

    POST /v1/generate  {"prompt","temperature","n","max_tokens","logprobs","seed"}
                       -> {"choices":[{"text","token_logprobs"|null}]}
    POST /v1/image     {"prompt","n","seed"}   -> {"images":[{"png_base64"}]}
    POST /v1/caption   {"png_base64"}          -> {"caption"}
    POST /v1/embed     {"inputs":[...]}        -> {"dim","embeddings":[[...]]}

Engine failures answer 5xx with a JSON {"error": ...} body; malformed
payloads answer 400 the same way.
"""

from __future__ import annotations

import base64
import binascii

from fastapi import Depends, FastAPI, Header, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import SidecarConfig
from .engines import BadRequestError, EngineError, EngineSet, build_engines


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


def _b64(data: str) -> bytes:
    try:
        return base64.b64decode(data, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise BadRequestError("png_base64 is not valid base64") from exc


def create_app(config: SidecarConfig | None = None, engines: EngineSet | None = None) -> FastAPI:
    config = config or SidecarConfig()
    engines = engines or build_engines(config)
    app = FastAPI(title="vcot inference sidecar", version="0.1.0")

    def check_auth(authorization: str | None = Header(default=None)) -> None:
        if config.token and authorization != f"Bearer {config.token}":
            raise HTTPException(status_code=401, detail="missing or bad bearer token")

    @app.exception_handler(BadRequestError)
    def _bad_request(request, exc: BadRequestError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(EngineError)
    def _engine_error(request, exc: EngineError):
        return JSONResponse(status_code=500, content={"error": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {
            "status": "ok",
            "engines": {
                "generate": type(engines.text).__name__,
                "embed": type(engines.embed).__name__,
                "caption": type(engines.caption).__name__,
                "image": type(engines.image).__name__,
            },
            "embed_dim": engines.embed.dim,
        }

    @app.post("/v1/generate", response_model=GenerateResponse)
    def generate(req: GenerateRequest, _=Depends(check_auth)):
        with engines.lock_for(engines.text):
            choices = engines.text.generate(
                req.prompt, req.temperature, req.n, req.max_tokens, req.logprobs, req.seed
            )
        return {"choices": choices}

    @app.post("/v1/image", response_model=ImageResponse)
    def image(req: ImageRequest, _=Depends(check_auth)):
        with engines.lock_for(engines.image):
            images = engines.image.generate(req.prompt, req.n, req.seed)
        return {
            "images": [
                {"png_base64": base64.b64encode(png).decode("ascii")} for png in images
            ]
        }

    @app.post("/v1/caption", response_model=CaptionResponse)
    def caption(req: CaptionRequest, _=Depends(check_auth)):
        with engines.lock_for(engines.caption):
            text = engines.caption.caption(_b64(req.png_base64))
        return {"caption": text}

    @app.post("/v1/embed", response_model=EmbedResponse)
    def embed(req: EmbedRequest, _=Depends(check_auth)):
        if not req.inputs:
            raise BadRequestError("embed needs at least one input")
        vectors: list[list[float]] = []
        with engines.lock_for(engines.embed):
            for item in req.inputs:
                if item.kind == "text":
                    if item.text is None:
                        raise BadRequestError("text input without text")
                    vectors.append(engines.embed.embed_text(item.text))
                elif item.kind == "image":
                    if item.png_base64 is None:
                        raise BadRequestError("image input without png_base64")
                    vectors.append(engines.embed.embed_image(_b64(item.png_base64)))
                else:
                    raise BadRequestError(f"unknown embed kind {item.kind!r}")
        return {"dim": engines.embed.dim, "embeddings": vectors}

    return app
