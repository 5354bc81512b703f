from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import Optional
from slstream.config import settings
from slstream.models.pilot import PilotModel


class SamplerConfig(BaseModel):
    """Schema for one sequential sampler run."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    threshold_c: float = Field(..., gt=0)
    pilot: PilotModel
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED)
    max_block_len: int = Field(default_factory=lambda: settings.MAX_BLOCK_LEN, gt=0)
    # Constant start probability for the uniform baseline; None = rate-matched default.
    uniform_q: Optional[float] = Field(None, ge=0, le=1)

    @model_validator(mode="after")
    def block_len_fits_order(self) -> "SamplerConfig":
        if self.max_block_len < self.pilot.order + 1:
            raise ValueError(
                f"max_block_len ({self.max_block_len}) must be at least order + 1 "
                f"({self.pilot.order + 1})"
            )
        return self
