from dataclasses import dataclass
from enum import Enum
import numpy as np


@dataclass(frozen=True, slots=True)
class Sample:
    """One stream observation X_index."""
    index: int
    value: float


@dataclass(frozen=True, slots=True)
class LagVector:
    """Regressor z_i = [X_{i-1}, ..., X_{i-p}] for the sample at ``index``."""
    entries: np.ndarray
    index: int

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    def sq_norm(self) -> float:
        return float(self.entries @ self.entries)


class StabilityTag(str, Enum):
    STABLE = "stable"
    UNIT_ROOT = "unit_root"
    EXPLOSIVE = "explosive"


@dataclass(frozen=True)
class StabilityClass:
    tag: StabilityTag
    max_root_modulus: float

    @property
    def is_stable(self) -> bool:
        return self.tag is StabilityTag.STABLE

    def __repr__(self):
        return f"<StabilityClass(tag={self.tag.value}, max_root_modulus={self.max_root_modulus:.6g})>"
