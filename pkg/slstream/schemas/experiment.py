from pydantic import BaseModel, Field, field_validator
from typing import List, Optional
from slstream.models.block import Method
from slstream.schemas.process import ArProcessSpec


class GridCell(BaseModel):
    """One (beta, c) point of a simulation grid."""
    coeffs: List[float] = Field(..., min_length=1)
    threshold_c: float = Field(..., gt=0)


class ExperimentSpec(BaseModel):
    """Schema for a replicated benchmark over one process."""
    process: ArProcessSpec
    methods: List[Method] = Field(
        default_factory=lambda: [Method.LEVERAGE, Method.UNIFORM, Method.FIXED_LENGTH]
    )
    threshold_c: float = Field(..., gt=0)
    n0: int = Field(200, gt=0)
    n_rep: int = Field(100, ge=1)
    stream_len_cap: Optional[int] = Field(None, gt=0)
    seed_base: int = 0
    fixed_length: int = Field(200, gt=0)
    p_max: Optional[int] = Field(None, ge=1)

    @field_validator("methods")
    @classmethod
    def methods_not_empty(cls, value: List[Method]) -> List[Method]:
        if not value:
            raise ValueError("at least one method is required")
        return list(dict.fromkeys(value))


class GridConfig(BaseModel):
    """Declarative grid file read by ``bench``."""
    process: ArProcessSpec
    cells: List[GridCell] = Field(..., min_length=1)
    methods: List[Method] = Field(
        default_factory=lambda: [Method.LEVERAGE, Method.UNIFORM, Method.FIXED_LENGTH]
    )
    n0: int = Field(200, gt=0)
    n_rep: int = Field(100, ge=1)
    seed_base: int = 0
    fixed_length: int = Field(200, gt=0)
    stream_len_cap: Optional[int] = Field(None, gt=0)
    p_max: Optional[int] = Field(None, ge=1)

    def experiments(self) -> List[ExperimentSpec]:
        return [
            ExperimentSpec(
                process=self.process.with_coeffs(cell.coeffs),
                methods=self.methods,
                threshold_c=cell.threshold_c,
                n0=self.n0,
                n_rep=self.n_rep,
                stream_len_cap=self.stream_len_cap,
                seed_base=self.seed_base,
                fixed_length=self.fixed_length,
                p_max=self.p_max,
            )
            for cell in self.cells
        ]


class SweepConfig(BaseModel):
    """Declarative threshold sweep read by ``sweep``."""
    process: ArProcessSpec
    thresholds: List[float] = Field(..., min_length=1)
    n0: int = Field(200, gt=0)
    n_rep: int = Field(20, ge=1)
    train_len: int = Field(20_000, gt=0)
    test_len: int = Field(2_000, gt=0)
    seed_base: int = 0
    p_max: Optional[int] = Field(None, ge=1)

    @field_validator("thresholds")
    @classmethod
    def thresholds_positive(cls, value: List[float]) -> List[float]:
        if any(c <= 0 for c in value):
            raise ValueError("thresholds must be positive")
        return value
