"""Request/response bodies for the planning service."""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class HealthResponse(_Strict):
    status: str
    version: str


class ValidateResponse(_Strict):
    valid: bool
    # schema failures land in error; semantic findings in warnings
    error: Optional[str] = None
    warnings: list = Field(default_factory=list)


class GenerateRequest(_Strict):
    kind: Literal["so3", "rational", "bimanual"]
    seed: int = 0
    pairs: Optional[int] = Field(default=None, ge=1)
    regime: Optional[Literal["near_limit", "near_origin"]] = None


class RunRequest(_Strict):
    scenario: dict
    seed: Optional[int] = None
    pairs: Optional[int] = Field(default=None, ge=1)
    max_iters: Optional[int] = Field(default=None, ge=1)
    k_samples: Optional[int] = Field(default=None, ge=2)
    include_plots: bool = False


class RunResponse(_Strict):
    summary: dict
    failed: int
    csv: str
    plots: Optional[dict] = None  # filename -> svg text
