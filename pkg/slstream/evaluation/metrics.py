"""
Evaluation metrics for sampler benchmarks.

Includes:
- Kolmogorov-Smirnov checks against N(0, 1) and chi-square references
- Coefficient error and coverage summaries
- Latency measurement for the method under test
"""

from typing import Any, Dict, List, Optional, Sequence
from dataclasses import dataclass, field
import time
from functools import wraps
import numpy as np
from scipy import stats


@dataclass
class KsResult:
    """One Kolmogorov-Smirnov comparison."""
    statistic: float
    p_value: float
    n: int
    reference: str

    def passed(self, level: float = 0.01) -> bool:
        return self.p_value > level

    def to_dict(self) -> Dict[str, Any]:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "n": self.n,
            "reference": self.reference,
        }


def ks_normal(values: Sequence[float], scale: float = 1.0) -> KsResult:
    """KS test of ``values`` against N(0, scale^2)."""
    result = stats.kstest(np.asarray(values, dtype=float), "norm", args=(0.0, scale))
    return KsResult(float(result.statistic), float(result.pvalue), len(values), f"normal(0,{scale:g})")


def ks_chi2(values: Sequence[float], dof: int) -> KsResult:
    """KS test of ``values`` against chi-square with ``dof`` degrees of freedom."""
    result = stats.kstest(np.asarray(values, dtype=float), "chi2", args=(dof,))
    return KsResult(float(result.statistic), float(result.pvalue), len(values), f"chi2({dof})")


def coefficient_errors(beta_hat: Sequence[float], beta_true: Sequence[float]) -> np.ndarray:
    """
    Per-coordinate error beta_hat - beta.

    When the fitted order differs from the true order the shorter vector is
    padded with zeros (an AR(p) is an AR(p + k) with trailing zero lags).
    """
    a = np.asarray(beta_hat, dtype=float)
    b = np.asarray(beta_true, dtype=float)
    size = max(a.shape[0], b.shape[0])
    return np.pad(a, (0, size - a.shape[0])) - np.pad(b, (0, size - b.shape[0]))


def squared_error(beta_hat: Sequence[float], beta_true: Sequence[float]) -> float:
    err = coefficient_errors(beta_hat, beta_true)
    return float(err @ err)


def coverage_rate(hits: Sequence[bool]) -> float:
    if not hits:
        return 0.0
    return sum(1 for h in hits if h) / len(hits)


@dataclass
class Distribution:
    """Summary of one per-method metric across replicates."""
    values: List[float] = field(default_factory=list)

    def add(self, value: float) -> None:
        self.values.append(float(value))

    @property
    def median(self) -> Optional[float]:
        return float(np.median(self.values)) if self.values else None

    @property
    def mean(self) -> Optional[float]:
        return float(np.mean(self.values)) if self.values else None

    def to_dict(self) -> Dict[str, Any]:
        if not self.values:
            return {"n": 0}
        arr = np.asarray(self.values)
        return {
            "n": int(arr.shape[0]),
            "mean": float(arr.mean()),
            "median": float(np.median(arr)),
            "q25": float(np.quantile(arr, 0.25)),
            "q75": float(np.quantile(arr, 0.75)),
            "min": float(arr.min()),
            "max": float(arr.max()),
        }


def measure_latency(func):
    """
    Decorator to measure function execution time in milliseconds.

    Usage:
        @measure_latency
        def my_function():
            ...

    Returns:
        Tuple of (result, latency_ms)
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        result = func(*args, **kwargs)
        end_time = time.perf_counter()
        latency_ms = (end_time - start_time) * 1000
        return result, latency_ms
    return wrapper
