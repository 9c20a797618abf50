"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str = "ok"


class SweepRequest(BaseModel):
    filter: str
    param: str
    values: list[float]
    sample: int = Field(default=1000, ge=1)
    seed: int = 0
    params: dict[str, Any] = Field(default_factory=dict)


class CleanRuleModel(BaseModel):
    scope: str
    matcher: str
    pattern: str
    action: str = "remove"
    replace_with: str = ""
    fixpoint: bool = False


class CleanPreviewRequest(BaseModel):
    rule: CleanRuleModel
    sample: int = Field(default=1000, ge=1)
    seed: int = 0
    max_cases: int = Field(default=10, ge=1)


class ConfigPutRequest(BaseModel):
    content: str
    validate_only: bool = False


class ConfigResponse(BaseModel):
    path: str
    version: int
    content: str


class ConfigSavedResponse(BaseModel):
    path: str
    version: int
    valid: bool


class PipelineRunRequest(BaseModel):
    config_path: str
    input: str
    output: str
    report: Optional[str] = None


class RunStartedResponse(BaseModel):
    run_id: str


class ApiErrorBody(BaseModel):
    code: str
    message: str
    detail: dict[str, Any] = Field(default_factory=dict)
