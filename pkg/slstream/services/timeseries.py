"""
AR(p) stream primitives: lag window, simulation and stability classification.
"""

import math
from typing import Iterator, Optional, Sequence
import numpy as np
from scipy.signal import lfilter
from slstream.config import settings
from slstream.core.exceptions import ConfigurationError, DataError, NonFiniteSampleError
from slstream.models.timeseries import LagVector, Sample, StabilityClass, StabilityTag
from slstream.schemas.process import ArProcessSpec, GaussianInnovation, StudentTInnovation
from slstream.logging_config import get_logger

logger = get_logger(__name__)


class LagWindow:
    """
    Ring buffer over the last ``order`` samples.

    ``push(x_i)`` returns z_i = [X_{i-1}, ..., X_{i-p}], the regressor of the
    sample just pushed, once ``order`` earlier samples have been seen.
    """

    def __init__(self, order: int):
        if order < 1:
            raise ConfigurationError(f"Lag order must be >= 1, got {order}")
        self.order = order
        self._buffer = np.zeros(order)
        self._head = 0
        self._count = 0
        self._last_index: Optional[int] = None
        self._offsets = np.arange(1, order + 1)

    @property
    def warm(self) -> bool:
        return self._count >= self.order

    def current(self) -> np.ndarray:
        """Last ``order`` values, most recent first."""
        return self._buffer[(self._head - self._offsets) % self.order]

    def push(self, sample: Sample) -> Optional[LagVector]:
        if not math.isfinite(sample.value):
            raise NonFiniteSampleError(sample.index, sample.value)
        if self._last_index is not None and sample.index != self._last_index + 1:
            raise DataError(
                f"Stream index jumped from {self._last_index} to {sample.index}"
            )

        lag = LagVector(entries=self.current(), index=sample.index) if self.warm else None

        self._buffer[self._head] = sample.value
        self._head = (self._head + 1) % self.order
        self._count += 1
        self._last_index = sample.index
        return lag

    def nbytes(self) -> int:
        return self._buffer.nbytes + self._offsets.nbytes


def companion_matrix(coeffs: Sequence[float]) -> np.ndarray:
    """Companion matrix of z^p - b1 z^(p-1) - ... - bp."""
    beta = np.asarray(coeffs, dtype=float)
    p = beta.shape[0]
    companion = np.zeros((p, p))
    companion[0, :] = beta
    if p > 1:
        companion[1:, :-1] = np.eye(p - 1)
    return companion


def classify_stability(coeffs: Sequence[float], tol: float = None) -> StabilityClass:
    """
    Classify an AR coefficient vector by the largest characteristic root modulus.

    Args:
        coeffs: AR coefficients [b1, ..., bp]
        tol: half-width of the unit-circle band (defaults to STABILITY_TOL)

    Returns:
        StabilityClass with tag stable / unit_root / explosive
    """
    if len(coeffs) < 1:
        raise ConfigurationError("At least one coefficient is required")
    tol = settings.STABILITY_TOL if tol is None else tol

    roots = np.linalg.eigvals(companion_matrix(coeffs))
    modulus = float(np.max(np.abs(roots)))

    if modulus < 1.0 - tol:
        tag = StabilityTag.STABLE
    elif modulus <= 1.0 + tol:
        tag = StabilityTag.UNIT_ROOT
    else:
        tag = StabilityTag.EXPLOSIVE
    return StabilityClass(tag=tag, max_root_modulus=modulus)


def resolve_burn_in(spec: ArProcessSpec) -> int:
    if spec.burn_in is not None:
        return spec.burn_in
    return settings.BURN_IN_STABLE if classify_stability(spec.coeffs).is_stable else 0


def draw_innovations(spec: ArProcessSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    innovation = spec.innovation
    if isinstance(innovation, GaussianInnovation):
        return innovation.sigma * rng.standard_normal(size)
    if isinstance(innovation, StudentTInnovation):
        # Standardized so the variance is scale^2.
        standardize = math.sqrt(innovation.df / (innovation.df - 2.0))
        return innovation.scale * rng.standard_t(innovation.df, size) / standardize
    raise ConfigurationError(f"Unsupported innovation {innovation!r}")


def _ar_denominator(spec: ArProcessSpec) -> np.ndarray:
    return np.concatenate(([1.0], -np.asarray(spec.coeffs, dtype=float)))


def simulate_ar(spec: ArProcessSpec, n: int) -> np.ndarray:
    """
    Generate X_1..X_n from X_i = sum_k b_k X_{i-k} + e_i.

    The recursion starts from a zero state; the first burn_in values are
    discarded. Identical (spec, n) always gives the identical array.
    """
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    burn_in = resolve_burn_in(spec)

    rng = np.random.default_rng(spec.seed & ((1 << 64) - 1))
    innovations = draw_innovations(spec, rng, burn_in + n)
    series = lfilter([1.0], _ar_denominator(spec), innovations)[burn_in:]

    if not np.all(np.isfinite(series)):
        logger.error("simulation_overflow", coeffs=spec.coeffs, n=n)
        raise DataError("Simulated series overflowed; the process is too explosive for this n")
    return series


def stream_ar(spec: ArProcessSpec, n: int, chunk_size: int = 65536) -> Iterator[np.ndarray]:
    """
    Generate the same process lazily in chunks.

    Filter state is carried across chunks, so memory stays bounded by
    ``chunk_size`` regardless of ``n``.
    """
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    burn_in = resolve_burn_in(spec)
    rng = np.random.default_rng(spec.seed & ((1 << 64) - 1))
    denominator = _ar_denominator(spec)
    state = np.zeros(spec.order)

    remaining_burn = burn_in
    while remaining_burn > 0:
        size = min(chunk_size, remaining_burn)
        _, state = lfilter([1.0], denominator, draw_innovations(spec, rng, size), zi=state)
        remaining_burn -= size

    emitted = 0
    while emitted < n:
        size = min(chunk_size, n - emitted)
        chunk, state = lfilter([1.0], denominator, draw_innovations(spec, rng, size), zi=state)
        if not np.all(np.isfinite(chunk)):
            raise DataError("Simulated series overflowed; the process is too explosive for this n")
        emitted += size
        yield chunk


def to_samples(values: Sequence[float], start: int = 0) -> Iterator[Sample]:
    for offset, value in enumerate(values):
        yield Sample(index=start + offset, value=float(value))


def design_matrix(series: Sequence[float], p: int):
    """
    Batch design matrix Gamma (rows z_{p+1}..z_n) and response x_{p+1..n}.
    """
    x = np.asarray(series, dtype=float)
    n = x.shape[0]
    if n <= p:
        raise DataError(f"Series of length {n} is too short for order {p}")
    gamma = np.column_stack([x[p - k:n - k] for k in range(1, p + 1)])
    return gamma, x[p:]
