"""Request and response bodies for the HTTP endpoints."""

from __future__ import annotations

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    config: dict


class RunResponse(BaseModel):
    records: list[dict]


class SummarizeRequest(BaseModel):
    jsonl: str


class SummarizeResponse(BaseModel):
    csv: str
    records: int


class OracleCheckRequest(BaseModel):
    cases: int = Field(default=50, ge=1)
    seed: int = Field(default=0, ge=0)


class OracleCheckResponse(BaseModel):
    cases: int
    agreements: int
    disagreements: list[dict]
    all_agree: bool


class VersionResponse(BaseModel):
    name: str
    version: str
    schema_version: int
