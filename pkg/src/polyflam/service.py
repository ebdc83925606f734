"""HTTP prediction service.

Stateless per request: the bundle and reference data are loaded once at
startup and never mutated, so concurrent identical requests return
identical responses.  The service never trains; training happens offline
through the CLI.  All errors are structured {"error": {"code", "message"}}
objects; internal tracebacks never reach the client.
"""

from __future__ import annotations

import os
from functools import lru_cache

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .bundle import (
    TrainedBundle,
    bundle_metadata,
    database_comparison,
    decode_pdb_base64,
    load_bundle,
    predict_all,
)
from .errors import ConfigError, PolyflamError

BUNDLE_ENV_VAR = "POLYFLAM_BUNDLE"


class PredictRequest(BaseModel):
    smiles: str | None = None
    pdb_base64: str | None = None


def _error_body(code: str, message: str, **extra) -> dict:
    return {"error": {"code": code, "message": message, **extra}}


def create_app(bundle_path: str | None = None, bundle: TrainedBundle | None = None) -> FastAPI:
    """Build the service around one loaded bundle.

    The bundle comes from, in order: the ``bundle`` argument, the
    ``bundle_path`` argument, or the POLYFLAM_BUNDLE environment variable.
    """
    if bundle is None:
        path = bundle_path or os.environ.get(BUNDLE_ENV_VAR)
        if not path:
            raise ConfigError(
                f"no bundle: pass a path or set {BUNDLE_ENV_VAR}"
            )
        bundle = load_bundle(path)

    app = FastAPI(title="polyflam", version="1")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(PolyflamError)
    async def _domain_error(request: Request, exc: PolyflamError):
        extra = {}
        offset = getattr(exc, "offset", None)
        line = getattr(exc, "line", None)
        if offset is not None:
            extra["offset"] = offset
        if line is not None:
            extra["line"] = line
        status = 404 if exc.code == "config_error" and request.url.path.startswith("/database") else 400
        return JSONResponse(status_code=status, content=_error_body(exc.code, str(exc), **extra))

    @app.exception_handler(Exception)
    async def _internal_error(request: Request, exc: Exception):
        return JSONResponse(
            status_code=500,
            content=_error_body("internal_error", "internal error"),
        )

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    @app.get("/models")
    async def models():
        return bundle_metadata(bundle)

    @app.get("/database/{metric}")
    async def database(metric: str):
        return _cached_comparison(metric)

    @app.post("/predict")
    async def predict(request: PredictRequest):
        if (request.smiles is None) == (request.pdb_base64 is None):
            return JSONResponse(
                status_code=400,
                content=_error_body(
                    "invalid_request", "provide exactly one of 'smiles' or 'pdb_base64'"
                ),
            )
        if request.smiles is not None:
            prediction = predict_all(bundle, smiles=request.smiles)
        else:
            prediction = predict_all(bundle, pdb=decode_pdb_base64(request.pdb_base64))
        return prediction.as_dict()

    return app


@lru_cache(maxsize=None)
def _cached_comparison(metric: str) -> dict:
    return database_comparison(metric)
