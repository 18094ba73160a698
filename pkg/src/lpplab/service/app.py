"""FastAPI application wrapping the simulation core.

Validation failures map to 400, computation failures to 500; bodies carry a
"detail" string either way. Endpoints are synchronous: a run blocks its
worker until the experiment finishes.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import SCHEMA_VERSION, __version__
from ..errors import (
    InsufficientData,
    InvalidParams,
    LppError,
    ParseError,
    SchemaError,
    ValidationError,
)
from ..cli.config import validate_config
from ..cli.records import parse_jsonl, summarize_records
from ..cli.runner import cross_check, run_config
from .models import (
    OracleCheckRequest,
    OracleCheckResponse,
    RunRequest,
    RunResponse,
    SummarizeRequest,
    SummarizeResponse,
    VersionResponse,
)

_BAD_REQUEST = (ParseError, ValidationError, InvalidParams, SchemaError, InsufficientData)


def create_app() -> FastAPI:
    app = FastAPI(title="lpplab", version=__version__)

    @app.post("/v1/run", response_model=RunResponse)
    def run(req: RunRequest) -> RunResponse:
        try:
            cfg = validate_config(req.config)
            return RunResponse(records=run_config(cfg))
        except _BAD_REQUEST as e:
            raise HTTPException(status_code=400, detail=str(e)) from e
        except LppError as e:
            raise HTTPException(status_code=500, detail=str(e)) from e

    @app.post("/v1/summarize", response_model=SummarizeResponse)
    def summarize(req: SummarizeRequest) -> SummarizeResponse:
        try:
            records = parse_jsonl(req.jsonl)
            return SummarizeResponse(csv=summarize_records(records), records=len(records))
        except _BAD_REQUEST as e:
            raise HTTPException(status_code=400, detail=str(e)) from e
        except LppError as e:
            raise HTTPException(status_code=500, detail=str(e)) from e

    @app.post("/v1/oracle-check", response_model=OracleCheckResponse)
    def oracle_check(req: OracleCheckRequest) -> OracleCheckResponse:
        return OracleCheckResponse(**cross_check(cases=req.cases, seed=req.seed))

    @app.get("/v1/version", response_model=VersionResponse)
    def version() -> VersionResponse:
        return VersionResponse(
            name="lpplab", version=__version__, schema_version=SCHEMA_VERSION
        )

    return app
