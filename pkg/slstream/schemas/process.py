from pydantic import BaseModel, Field, field_validator
from typing import Annotated, List, Literal, Optional, Union


class GaussianInnovation(BaseModel):
    """N(0, sigma^2) innovations."""
    kind: Literal["gaussian"] = "gaussian"
    sigma: float = Field(1.0, gt=0)

    @property
    def variance(self) -> float:
        return self.sigma ** 2


class StudentTInnovation(BaseModel):
    """Student-t innovations standardized to variance scale^2."""
    kind: Literal["student_t"] = "student_t"
    df: float = Field(4.0, gt=2)
    scale: float = Field(1.0, gt=0)

    @property
    def variance(self) -> float:
        return self.scale ** 2


InnovationSpec = Annotated[
    Union[GaussianInnovation, StudentTInnovation],
    Field(discriminator="kind"),
]


class ArProcessSpec(BaseModel):
    """Schema for a simulated AR(p) stream."""
    coeffs: List[float] = Field(..., min_length=1)
    innovation: InnovationSpec = Field(default_factory=GaussianInnovation)
    burn_in: Optional[int] = Field(None, ge=0)
    seed: int = 0

    @field_validator("coeffs")
    @classmethod
    def coeffs_finite(cls, value: List[float]) -> List[float]:
        if any(v != v or v in (float("inf"), float("-inf")) for v in value):
            raise ValueError("coefficients must be finite")
        return value

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def with_seed(self, seed: int) -> "ArProcessSpec":
        return self.model_copy(update={"seed": seed})

    def with_coeffs(self, coeffs: List[float]) -> "ArProcessSpec":
        return self.model_copy(update={"coeffs": list(coeffs)})
