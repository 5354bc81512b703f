from pydantic import BaseModel, Field
from typing import List, Literal, Optional

SCHEMA_VERSION = "1.0"


class ReportRecord(BaseModel):
    """Common envelope of every JSONL line."""
    schema_version: str = SCHEMA_VERSION
    kind: str
    config_hash: str
    seed: int
    channel: Optional[str] = None


class PilotRecord(ReportRecord):
    kind: Literal["pilot"] = "pilot"
    order: int = Field(..., ge=1)
    n0: int = Field(..., ge=1)
    precision: List[List[float]]
    beta0: List[float]
    sigma0_sq: float = Field(..., gt=0)
    rescale: float = Field(1.0, gt=0)
    start_rate: float = Field(0.0, ge=0, le=1)


class BlockRecord(ReportRecord):
    kind: Literal["block"] = "block"
    method: Literal["leverage", "uniform", "fixed_length"]
    start: int
    stop: int
    length: int = Field(..., ge=1)
    acc_info: float = Field(..., ge=0)
    beta_hat: List[float]
    sigma_hat_sq: float
    degenerate: bool


class VerdictRecord(ReportRecord):
    kind: Literal["verdict"] = "verdict"
    start: int
    stop: int
    chi2: float = Field(..., ge=0)
    threshold: float = Field(..., gt=0)
    alarm: bool
    beta_hat: List[float]
    degenerate: bool


class LeveragePointRecord(ReportRecord):
    kind: Literal["leverage_point"] = "leverage_point"
    index: int
    leverage: float = Field(..., ge=0)


class ExperimentRowRecord(ReportRecord):
    kind: Literal["experiment_row"] = "experiment_row"
    cell: str
    replicate: int
    method: str
    ok: bool
    mse: Optional[float] = None
    coord_errors: List[float] = Field(default_factory=list)
    seconds: Optional[float] = None
    block_len: Optional[int] = None
    acc_info: Optional[float] = None
    failure: Optional[str] = None


class SafeguardRecord(ReportRecord):
    kind: Literal["safeguard_abort"] = "safeguard_abort"
    start: int
    index: int
