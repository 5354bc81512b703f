"""
Deviation monitoring: score every completed block against the pilot model.
"""

from typing import Callable, Iterable, Iterator, Optional, Tuple
import numpy as np
from slstream.config import settings
from slstream.core.exceptions import ConfigurationError
from slstream.models.block import EventTag, Method, SamplerEvent, SlsBlock
from slstream.models.monitor import MonitorVerdict
from slstream.models.pilot import PilotModel
from slstream.models.timeseries import Sample
from slstream.schemas.sampler import SamplerConfig
from slstream.services.estimation import block_ls, chi2_quantile, pivot_chi2
from slstream.services.sampler import SequentialSampler, streaming_leverage
from slstream.services.timeseries import LagWindow
from slstream.logging_config import get_logger

logger = get_logger(__name__)


def score_block(block: SlsBlock, pilot: PilotModel, threshold: float) -> MonitorVerdict:
    """Chi-square deviation of one block from the pilot coefficients."""
    est = block_ls(block, pilot.order)
    chi2 = pivot_chi2(est, pilot.beta0, pilot.sigma0_sq)
    return MonitorVerdict(
        block_ref=(block.start, block.stop),
        chi2=chi2,
        threshold=threshold,
        # Degenerate (flat or clipped) blocks are reported, never alarmed.
        alarm=(chi2 > threshold) and not est.degenerate,
        beta_hat=est.beta_hat,
        degenerate=est.degenerate,
    )


class ChannelMonitor:
    """
    Restart-loop sampler plus per-block scoring for one channel.

    Args:
        config: sampler configuration (carries the pilot)
        alpha: alarm level; threshold is the chi2_p (1 - alpha) quantile
        start_index: first index eligible to start a block
        on_event: optional callback receiving every sampler event
    """

    def __init__(
        self,
        config: SamplerConfig,
        alpha: float = None,
        start_index: int = 0,
        on_event: Optional[Callable[[SamplerEvent], None]] = None
    ):
        self.alpha = settings.ALARM_ALPHA if alpha is None else alpha
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError(f"alpha must lie in (0, 1), got {self.alpha}")
        self.pilot = config.pilot
        self.threshold = chi2_quantile(self.pilot.order, 1.0 - self.alpha)
        self.sampler = SequentialSampler(config, Method.LEVERAGE, start_index)
        self.on_event = on_event
        self.verdicts = 0
        self.alarms = 0

    def process(self, stream: Iterable[Sample]) -> Iterator[MonitorVerdict]:
        for event in self.sampler.run(stream):
            if self.on_event is not None:
                self.on_event(event)
            if event.tag is not EventTag.BLOCK_COMPLETED:
                continue

            verdict = score_block(event.block, self.pilot, self.threshold)
            self.verdicts += 1
            if verdict.alarm:
                self.alarms += 1
                logger.info(
                    "alarm_raised",
                    start=verdict.block_ref[0],
                    stop=verdict.block_ref[1],
                    chi2=verdict.chi2,
                    threshold=verdict.threshold,
                )
            yield verdict

    @property
    def aborts(self) -> int:
        return self.sampler.aborts


def monitor_stream(
    stream: Iterable[Sample],
    pilot: PilotModel,
    cfg: SamplerConfig,
    alpha: float = None,
    start_index: int = 0
) -> Iterator[MonitorVerdict]:
    """Verdicts in block-completion order for one stream."""
    if cfg.pilot is not pilot:
        cfg = cfg.model_copy(update={"pilot": pilot})
    yield from ChannelMonitor(cfg, alpha, start_index).process(stream)


def leverage_trace(stream: Iterable[Sample], pilot: PilotModel) -> Iterator[Tuple[int, float]]:
    """Per-sample streaming leverage (index, h) after the lag window is warm."""
    window = LagWindow(pilot.order)
    precision = np.array(pilot.precision * pilot.rescale)
    for sample in stream:
        z = window.push(sample)
        if z is not None:
            yield sample.index, streaming_leverage(z, precision)
