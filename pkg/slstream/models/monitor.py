from dataclasses import dataclass
from typing import Any, Dict, Tuple
import numpy as np


@dataclass(frozen=True)
class MonitorVerdict:
    block_ref: Tuple[int, int]
    chi2: float
    threshold: float
    alarm: bool
    beta_hat: np.ndarray
    degenerate: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "start": self.block_ref[0],
            "stop": self.block_ref[1],
            "chi2": self.chi2,
            "threshold": self.threshold,
            "alarm": self.alarm,
            "beta_hat": self.beta_hat.tolist(),
            "degenerate": self.degenerate,
        }
