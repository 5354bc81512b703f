from pydantic import BaseModel, Field
from typing import Literal, Optional


class StreamSource(BaseModel):
    """Schema for an input stream (file path or stdin when path is None / '-')."""
    format: Literal["csv", "raw_f32le", "raw_f64le"] = "csv"
    path: Optional[str] = None
    sample_rate_hz: Optional[float] = Field(None, gt=0)
    channel: str = "ch0"

    @property
    def is_stdin(self) -> bool:
        return self.path in (None, "-")

    @property
    def is_binary(self) -> bool:
        return self.format != "csv"
