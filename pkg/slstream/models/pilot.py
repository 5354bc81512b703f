from dataclasses import dataclass
from typing import Any, Dict
import numpy as np


@dataclass(frozen=True)
class PilotModel:
    """
    Quantities fixed once from the first n0 samples.

    Attributes:
        order: AR order p selected by BIC
        precision: symmetric p x p estimate of (Gamma^T Gamma)^dagger
        beta0: pilot least-squares coefficients
        sigma0_sq: pilot innovation variance
        n0: pilot size
        rescale: multiplier applied to leverage scores (1.0 = plain plug-in)
        start_rate: mean of min{h, 1} over the pilot regressors; the default
            start probability of the uniform baseline
    """
    order: int
    precision: np.ndarray
    beta0: np.ndarray
    sigma0_sq: float
    n0: int
    rescale: float = 1.0
    start_rate: float = 0.0

    def __post_init__(self):
        # Shared read-only across samplers.
        self.precision.setflags(write=False)
        self.beta0.setflags(write=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "order": self.order,
            "precision": self.precision.tolist(),
            "beta0": self.beta0.tolist(),
            "sigma0_sq": self.sigma0_sq,
            "n0": self.n0,
            "rescale": self.rescale,
            "start_rate": self.start_rate,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PilotModel":
        return cls(
            order=int(data["order"]),
            precision=np.asarray(data["precision"], dtype=float),
            beta0=np.asarray(data["beta0"], dtype=float),
            sigma0_sq=float(data["sigma0_sq"]),
            n0=int(data["n0"]),
            rescale=float(data.get("rescale", 1.0)),
            start_rate=float(data.get("start_rate", 0.0)),
        )

    def __repr__(self):
        return f"<PilotModel(order={self.order}, n0={self.n0}, sigma0_sq={self.sigma0_sq:.4g})>"
