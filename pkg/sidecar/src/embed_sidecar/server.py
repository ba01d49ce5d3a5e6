"""FastAPI app implementing the remote-embed protocol.

Responses are independent per request; the only shared state is the
loaded (read-only) model, so concurrent requests are safe. Malformed JSON
gets 400, an oversized batch 413, encoder failures 500.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .encoders import load_encoder

DEFAULT_PORT = 8750


@dataclass
class ServerConfig:
    model_name: str = "dev"
    port: int = int(os.environ.get("GRAG_SIDECAR_PORT", DEFAULT_PORT))
    max_batch: int = 256
    device: str | None = None
    dev_dim: int = 32  # dev backend only; real models report their own dim

    def __post_init__(self):
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")


class EmbedRequest(BaseModel):
    texts: list[str]


def create_app(cfg: ServerConfig | None = None) -> FastAPI:
    cfg = cfg or ServerConfig()
    encoder = load_encoder(cfg.model_name, dim=cfg.dev_dim, device=cfg.device)
    app = FastAPI(title="grag embedding sidecar")

    @app.exception_handler(RequestValidationError)
    async def malformed_request(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/info")
    def info():
        return {"dim": encoder.dim, "model": encoder.name}

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/embed")
    def embed(request: EmbedRequest):
        if len(request.texts) > cfg.max_batch:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {len(request.texts)} exceeds max {cfg.max_batch}",
            )
        try:
            embeddings = encoder.encode(request.texts)
        except Exception as exc:  # model failure -> 500 with message
            raise HTTPException(status_code=500, detail=f"encoder failed: {exc}") from exc
        return {"embeddings": embeddings}

    return app
