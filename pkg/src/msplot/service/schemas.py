"""Pydantic request/response models of the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class CurveResult(BaseModel):
    """Per-curve outlyingness (and detection evidence when available)."""

    curve_id: str
    mo: list[float]
    vo: float
    fo: float
    srmd: float | None = None
    flagged: bool | None = None


class OutlyingnessRequest(BaseModel):
    """Summaries only, no detection."""

    curves_csv: str = Field(description="long CSV: curve_id,t,dim_1..dim_p")
    directions: int = Field(default=200, ge=1)
    seed: int = 0

    model_config = ConfigDict(extra="forbid")


class OutlyingnessResponse(BaseModel):
    p: int
    curves: list[CurveResult]


class DetectRequest(BaseModel):
    curves_csv: str = Field(description="long CSV: curve_id,t,dim_1..dim_p")
    method: str = Field(default="srmd-f", pattern="^(srmd-f|boxplot)$")
    quantile: float = Field(default=0.993, gt=0.0, lt=1.0)
    inflation: float = Field(default=1.5, gt=0.0)
    directions: int = Field(default=200, ge=1)
    cutoff_mode: str = Field(default="f", pattern="^(f|calibrated|chisq)$")
    seed: int = 0

    model_config = ConfigDict(extra="forbid")


class DetectResponse(BaseModel):
    p: int
    method: str
    cutoff: float | None
    curves: list[CurveResult]


class SimulateRequest(BaseModel):
    model: int = Field(ge=1, le=5)
    n: int = Field(default=100, ge=1)
    c: float = Field(default=0.1, ge=0.0, lt=1.0)
    m: int = Field(default=50, ge=2)
    seed: int = 0

    model_config = ConfigDict(extra="forbid")


class SimulateResponse(BaseModel):
    curves_csv: str
    truth_csv: str


class BenchRequest(BaseModel):
    model: int = Field(ge=1, le=5)
    n: int = Field(default=100, ge=1)
    c: float = Field(default=0.1, ge=0.0, lt=1.0)
    m: int = Field(default=50, ge=2)
    reps: int = Field(default=200, ge=1)
    seed: int = 0
    method: str = Field(default="srmd-f", pattern="^(srmd-f|boxplot)$")
    quantile: float = Field(default=0.993, gt=0.0, lt=1.0)

    model_config = ConfigDict(extra="forbid")


class RateRow(BaseModel):
    rep: int
    p_c: float
    p_f: float


class BenchResponse(BaseModel):
    rates: list[RateRow]
    summary: dict[str, float]


class MsPlotRequest(BaseModel):
    curves_csv: str
    mode: str = Field(default="full", pattern="^(full|norm)$")
    detect: bool = Field(default=True, description="overlay the detection rule")
    method: str = Field(default="srmd-f", pattern="^(srmd-f|boxplot)$")
    quantile: float = Field(default=0.993, gt=0.0, lt=1.0)
    inflation: float = Field(default=1.5, gt=0.0)
    directions: int = Field(default=200, ge=1)
    seed: int = 0

    model_config = ConfigDict(extra="forbid")


class PlotRequest(BaseModel):
    """Array and outliergram plots: summaries only, no detection overlay."""

    curves_csv: str
    directions: int = Field(default=200, ge=1)
    seed: int = 0

    model_config = ConfigDict(extra="forbid")


class HealthResponse(BaseModel):
    status: str
    version: str
