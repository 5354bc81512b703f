"""
Sequential block samplers over an AR(p) stream.

``SequentialSampler`` runs the leverage-driven start rule (or the uniform
baseline) followed by sequential expansion until the accumulated regressor
energy reaches the information threshold. After each completed block the
machine returns to seeking a new start, so a single instance can run over an
unbounded stream.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, List, Optional
import numpy as np
from slstream.core.exceptions import ConfigurationError, DataError
from slstream.core.rng import CounterRng
from slstream.models.block import EventTag, Method, SamplerEvent, SlsBlock
from slstream.models.timeseries import LagVector, Sample
from slstream.schemas.sampler import SamplerConfig
from slstream.services.timeseries import LagWindow, to_samples
from slstream.logging_config import get_logger

logger = get_logger(__name__)


def streaming_leverage(z, precision: np.ndarray) -> float:
    """
    Streaming leverage score z^T Omega z, O(p^2) per call.
    """
    entries = z.entries if isinstance(z, LagVector) else np.asarray(z, dtype=float)
    if precision.ndim != 2 or entries.shape[0] != precision.shape[0]:
        raise ConfigurationError(
            f"Regressor of length {entries.shape[0]} does not match precision {precision.shape}"
        )
    # Clip rounding noise from a PSD form.
    return max(float(entries @ precision @ entries), 0.0)


def bernoulli_start(h: float, rng: CounterRng, index: int) -> bool:
    """Success with probability min{h, 1}, decided by the draw at ``index``."""
    return rng.uniform(index) < min(h, 1.0)


class Phase(str, Enum):
    SEEKING_START = "seeking_start"
    EXPANDING = "expanding"


@dataclass
class SamplerState:
    phase: Phase = Phase.SEEKING_START
    block_start: Optional[int] = None
    acc_info: float = 0.0
    block_buffer: List[float] = field(default_factory=list)

    def reset(self) -> None:
        self.phase = Phase.SEEKING_START
        self.block_start = None
        self.acc_info = 0.0
        self.block_buffer = []


class SequentialSampler:
    """
    One-block-at-a-time sequential sampler.

    Args:
        config: threshold, pilot, seed and safeguard
        method: leverage (SLS) or uniform start rule
        start_index: samples before this index only warm the lag window
    """

    def __init__(
        self,
        config: SamplerConfig,
        method: Method = Method.LEVERAGE,
        start_index: int = 0
    ):
        if method is Method.FIXED_LENGTH:
            raise ConfigurationError("fixed_length blocks come from fixed_length_block()")
        self.config = config
        self.method = method
        self.start_index = start_index
        self.pilot = config.pilot
        self.order = config.pilot.order
        self.threshold_c = config.threshold_c
        self.max_block_len = config.max_block_len
        self.start_probability = (
            config.uniform_q if config.uniform_q is not None else config.pilot.start_rate
        )

        self._precision = np.array(config.pilot.precision * config.pilot.rescale)
        self._rng = CounterRng(config.seed)
        self._window = LagWindow(self.order)
        self.state = SamplerState()

        self.samples_seen = 0
        self.starts = 0
        self.blocks_completed = 0
        self.aborts = 0

    def leverage(self, z: LagVector) -> float:
        return streaming_leverage(z, self._precision)

    def _start_trial(self, h: float, index: int) -> bool:
        if self.method is Method.LEVERAGE:
            return bernoulli_start(h, self._rng, index)
        return self._rng.uniform(index) < self.start_probability

    def step(self, sample: Sample) -> Optional[SamplerEvent]:
        """
        Advance the state machine by one sample.

        Returns None while the lag window is still warming up.
        """
        z = self._window.push(sample)
        self.samples_seen += 1
        if z is None:
            return None

        h = self.leverage(z)
        state = self.state
        index = sample.index

        if state.phase is Phase.SEEKING_START:
            if index < self.start_index or not self._start_trial(h, index):
                return SamplerEvent(EventTag.NONE, index, h)
            self.starts += 1
            state.phase = Phase.EXPANDING
            state.block_start = index
            state.block_buffer = list(z.entries[::-1])
            state.block_buffer.append(sample.value)
            state.acc_info = z.sq_norm()
            if state.acc_info >= self.threshold_c:
                return self._complete(index, h)
            return SamplerEvent(EventTag.BLOCK_STARTED, index, h, block_start=index)

        state.block_buffer.append(sample.value)
        state.acc_info += z.sq_norm()
        if state.acc_info >= self.threshold_c:
            return self._complete(index, h)
        if index - state.block_start + 1 > self.max_block_len:
            return self._abort(index, h)
        return SamplerEvent(EventTag.NONE, index, h)

    def _complete(self, index: int, h: float) -> SamplerEvent:
        state = self.state
        block = SlsBlock(
            start=state.block_start,
            stop=index,
            values=np.asarray(state.block_buffer, dtype=float),
            order=self.order,
            acc_info=state.acc_info,
            method=self.method,
        )
        state.reset()
        self.blocks_completed += 1
        logger.debug("block_completed", method=self.method.value, start=block.start, stop=block.stop)
        return SamplerEvent(EventTag.BLOCK_COMPLETED, index, h, block)

    def _abort(self, index: int, h: float) -> SamplerEvent:
        start = self.state.block_start
        self.state.reset()
        self.aborts += 1
        logger.warning(
            "safeguard_abort",
            method=self.method.value,
            start=start,
            index=index,
            max_block_len=self.max_block_len,
        )
        return SamplerEvent(EventTag.SAFEGUARD_ABORT, index, h, block_start=start)

    def run(self, stream: Iterable[Sample], stop_after: int = None) -> Iterator[SamplerEvent]:
        """
        Restart loop over a stream; yields every post-warm-up event.

        Args:
            stream: samples in index order
            stop_after: stop once this many blocks have completed
        """
        for sample in stream:
            event = self.step(sample)
            if event is None:
                continue
            yield event
            if (
                stop_after is not None
                and event.tag is EventTag.BLOCK_COMPLETED
                and self.blocks_completed >= stop_after
            ):
                return

    def blocks(self, stream: Iterable[Sample], stop_after: int = None) -> Iterator[SlsBlock]:
        for event in self.run(stream, stop_after):
            if event.tag is EventTag.BLOCK_COMPLETED:
                yield event.block

    def resident_nbytes(self) -> int:
        """Bytes held outside the active block buffer."""
        return (
            self._window.nbytes()
            + self._precision.nbytes
            + self._rng.nbytes()
        )


def sls_step(sampler: SequentialSampler, sample: Sample) -> Optional[SamplerEvent]:
    """Single step of a leverage sampler."""
    if sampler.method is not Method.LEVERAGE:
        raise ConfigurationError("sls_step needs a leverage sampler")
    return sampler.step(sample)


def uniform_step(sampler: SequentialSampler, sample: Sample) -> Optional[SamplerEvent]:
    """Single step of a uniform-start sampler."""
    if sampler.method is not Method.UNIFORM:
        raise ConfigurationError("uniform_step needs a uniform sampler")
    return sampler.step(sample)


def fixed_length_block(stream, n0: int, length: int, order: int) -> SlsBlock:
    """
    Deterministic block of ``length`` samples starting right after the pilot.

    Indices are zero-based: the block covers stream positions n0..n0+length-1.
    """
    if length < 1:
        raise ConfigurationError(f"Block length must be >= 1, got {length}")
    if n0 < order:
        raise ConfigurationError(f"n0={n0} leaves no room for {order} pre-start lags")
    x = np.asarray(stream, dtype=float)
    if x.shape[0] < n0 + length:
        raise DataError(
            f"Stream of {x.shape[0]} samples is shorter than n0 + length = {n0 + length}"
        )

    values = np.array(x[n0 - order:n0 + length])
    block = SlsBlock(
        start=n0,
        stop=n0 + length - 1,
        values=values,
        order=order,
        acc_info=0.0,
        method=Method.FIXED_LENGTH,
    )
    gamma, _ = block.design()
    return SlsBlock(
        start=block.start,
        stop=block.stop,
        values=values,
        order=order,
        acc_info=float(np.sum(gamma * gamma)),
        method=Method.FIXED_LENGTH,
    )


def replay_block(block: SlsBlock) -> np.ndarray:
    """Per-step ||z_i||^2 over a block, for checking the stopping rule offline."""
    gamma, _ = block.design()
    return np.einsum("ij,ij->i", gamma, gamma)


def sample_blocks(
    values,
    config: SamplerConfig,
    method: Method = Method.LEVERAGE,
    start_index: int = 0,
    stop_after: int = None
) -> List[SlsBlock]:
    """Convenience wrapper: run a sampler over an in-memory series."""
    sampler = SequentialSampler(config, method, start_index)
    return list(sampler.blocks(to_samples(values), stop_after))
