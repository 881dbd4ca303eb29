"""Request and response models for the HTTP service and the CLI."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field, model_validator

OutcomeKind = Literal["continuous", "survival", "class"]


class DataPayload(BaseModel):
    """A dataset either as CSV text or as explicit arrays."""

    csv: Optional[str] = None
    outcome: OutcomeKind = "continuous"
    outcome_column: str = "y"
    x: Optional[list[list[float]]] = None
    y: Optional[list[float]] = None
    time: Optional[list[float]] = None
    status: Optional[list[int]] = None
    labels: Optional[list[int]] = None
    feature_ids: Optional[list[str]] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.csv is None) == (self.x is None):
            raise ValueError("give exactly one of csv or x")
        return self


class ScreenSpec(BaseModel):
    tau: Optional[float] = Field(None, ge=0)
    top_m: Optional[int] = Field(None, ge=1)
    rate: Optional[float] = Field(None, ge=0)

    @model_validator(mode="after")
    def _at_most_one(self):
        if sum(v is not None for v in (self.tau, self.top_m, self.rate)) > 1:
            raise ValueError("set at most one of tau, top_m, rate")
        return self


class ErrorResponse(BaseModel):
    error: str
    message: str
    details: Optional[dict[str, Any]] = None


class SimulateRequest(BaseModel):
    generator: Literal["example1", "example2", "example3", "factor", "prop5"] = "example1"
    seed: int = 0
    replication: int = 0
    params: dict[str, Any] = {}


class SimulateResponse(BaseModel):
    generator: str
    seed: int
    replication: int
    train_csv: str
    test_csv: Optional[str] = None
    truth: Optional[list[int]] = None
    spec: Optional[dict[str, Any]] = None
    oracle: Optional[dict[str, Any]] = None


class ScreenRequest(BaseModel):
    data: DataPayload
    screen: ScreenSpec = ScreenSpec()


class ScoreRow(BaseModel):
    feature_id: str
    score: float
    selected: bool


class ScreenResponse(BaseModel):
    kind: str
    rule: dict[str, Any]
    n_selected: int
    scores: list[ScoreRow]


FitMethod = Literal["spc", "fs", "spc-fs", "lasso", "spc-lasso", "nsc-fs"]


class FitRequest(BaseModel):
    data: DataPayload
    method: FitMethod = "spc-lasso"
    k: int = Field(1, ge=1)
    screen: ScreenSpec = ScreenSpec()
    max_steps: Optional[int] = Field(None, ge=1)
    mu: Optional[float] = Field(None, ge=0)
    penalty_scale: Literal["raw", "per-n"] = "raw"
    seed: int = 0


class FitResponse(BaseModel):
    method: str
    n: int
    p: int
    selected: list[str] = []
    entry_order: list[str] = []
    coefficients: dict[str, float] = {}
    intercept: Optional[float] = None
    eigenvalues: Optional[list[float]] = None
    spc_coefficients: Optional[list[float]] = None
    y_tilde: Optional[list[float]] = None
    mu: Optional[float] = None
    penalty_scale: Optional[str] = None
    delta: Optional[float] = None
    misclassified: Optional[list[int]] = None
    screen_relaxed: bool = False


class PathRequest(BaseModel):
    data: DataPayload
    response: Literal["raw", "spc"] = "raw"
    k: int = Field(1, ge=1)
    screen: ScreenSpec = ScreenSpec()
    penalty_scale: Literal["raw", "per-n"] = "raw"
    max_entries: Optional[int] = Field(None, ge=1)


class KnotRow(BaseModel):
    knot: int
    mu: float
    feature: str
    coefficient: float


class PathResponse(BaseModel):
    penalty_scale: str
    n_knots: int
    mu: list[float]
    entry_order: list[str]
    events: list[list[Any]]
    kkt_ok: bool
    max_kkt_violation: float
    knots: list[KnotRow]


class ExperimentRequest(BaseModel):
    preset: Optional[str] = None
    config: dict[str, Any] = {}
    output: Optional[str] = None
    format: Literal["csv", "json"] = "csv"


class ExperimentResponse(BaseModel):
    config: dict[str, Any]
    table: list[dict[str, Any]]
    methods: list[dict[str, Any]]
    errors: int
    files: list[str] = []
