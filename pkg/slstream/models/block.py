from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional
import numpy as np


class Method(str, Enum):
    LEVERAGE = "leverage"
    UNIFORM = "uniform"
    FIXED_LENGTH = "fixed_length"


@dataclass(frozen=True)
class SlsBlock:
    """
    One consecutive segment [X_start, ..., X_stop].

    ``values`` also carries the ``order`` samples preceding ``start`` so the
    block's design matrix can be rebuilt without the stream.
    """
    start: int
    stop: int
    values: np.ndarray
    order: int
    acc_info: float
    method: Method

    @property
    def length(self) -> int:
        return self.stop - self.start + 1

    def design(self):
        """Return (Gamma, x) with Gamma rows z_start..z_stop, most-recent lag first."""
        p = self.order
        n = self.length
        gamma = np.column_stack([self.values[p - k:p - k + n] for k in range(1, p + 1)])
        return gamma, self.values[p:]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "start": self.start,
            "stop": self.stop,
            "length": self.length,
            "acc_info": self.acc_info,
            "method": self.method.value,
        }


class EventTag(str, Enum):
    NONE = "none"
    BLOCK_STARTED = "block_started"
    BLOCK_COMPLETED = "block_completed"
    SAFEGUARD_ABORT = "safeguard_abort"


@dataclass(frozen=True, slots=True)
class SamplerEvent:
    tag: EventTag
    index: int
    leverage_score: float
    block: Optional[SlsBlock] = None
    block_start: Optional[int] = None


@dataclass(frozen=True)
class BlockEstimate:
    beta_hat: np.ndarray
    gram: np.ndarray
    sigma_hat_sq: float
    block_len: int
    info_trace: float
    degenerate: bool = False

    @property
    def order(self) -> int:
        return self.beta_hat.shape[0]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta_hat": self.beta_hat.tolist(),
            "gram": self.gram.tolist(),
            "sigma_hat_sq": self.sigma_hat_sq,
            "block_len": self.block_len,
            "info_trace": self.info_trace,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class ConfidenceRegion:
    """Ellipsoid {beta : (beta - center)^T shape (beta - center) <= radius_sq}."""
    center: np.ndarray
    shape: np.ndarray
    radius_sq: float
    level: float

    def contains(self, beta) -> bool:
        diff = np.asarray(beta, dtype=float) - self.center
        return bool(diff @ self.shape @ diff <= self.radius_sq)

    def half_widths(self) -> np.ndarray:
        """Semi-axis lengths, ordered by the eigenvalues of ``shape``."""
        eigvals = np.linalg.eigvalsh(self.shape)
        with np.errstate(divide="ignore"):
            return np.sqrt(self.radius_sq / eigvals)
