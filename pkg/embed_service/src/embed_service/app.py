"""FastAPI application implementing the embedding wire protocol.

POST /embed  {"texts": [str, ...]} -> {"vectors": [[float, ...], ...],
                                       "dim": int, "model": str}
GET  /info   -> {"name": str, "dim": int}

All errors come back as non-2xx with an {"error": str} body: 413 for an
oversize batch, 422 for malformed requests, 500 for encoder failures.
"""

from __future__ import annotations

from dataclasses import dataclass

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .encoders import Encoder, EncoderError, build_encoder, check_unit_norm


@dataclass(frozen=True)
class ServiceConfig:
    model: str = "aubmindlab/bert-base-arabertv2"
    port: int = 8000
    max_batch: int = 128
    device: str = "cpu"

    def __post_init__(self) -> None:
        if self.max_batch < 1:
            raise ValueError(f"max_batch must be >= 1, got {self.max_batch}")


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1)


def create_app(config: ServiceConfig, encoder: Encoder | None = None) -> FastAPI:
    """Build the service around a config; an encoder can be injected for tests."""
    encoder = encoder if encoder is not None else build_encoder(config.model, config.device)
    app = FastAPI(title="embed-service")

    @app.exception_handler(HTTPException)
    async def http_error(_request: Request, exc: HTTPException) -> JSONResponse:
        return JSONResponse(status_code=exc.status_code, content={"error": str(exc.detail)})

    @app.exception_handler(RequestValidationError)
    async def validation_error(_request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=422, content={"error": str(exc)})

    @app.get("/info")
    def info() -> dict:
        return {"name": encoder.name, "dim": encoder.dim}

    @app.post("/embed")
    def embed(request: EmbedRequest) -> dict:
        if len(request.texts) > config.max_batch:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {len(request.texts)} exceeds max_batch {config.max_batch}",
            )
        try:
            vectors = encoder.encode(request.texts)
            check_unit_norm(vectors)
        except EncoderError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from None
        return {"vectors": vectors, "dim": encoder.dim, "model": encoder.name}

    return app
