import itertools
import numpy as np
import pytest
from slstream.core.exceptions import ConfigurationError
from slstream.models.block import EventTag, Method, SlsBlock
from slstream.models.pilot import PilotModel
from slstream.schemas.process import ArProcessSpec, GaussianInnovation
from slstream.schemas.sampler import SamplerConfig
from slstream.services.estimation import chi2_quantile
from slstream.services.monitor import ChannelMonitor, leverage_trace, monitor_stream, score_block
from slstream.services.pilot import build_pilot
from slstream.services.timeseries import simulate_ar, to_samples


def test_threshold_is_chi2_quantile(sampler_config):
    monitor = ChannelMonitor(sampler_config, alpha=0.01)
    assert monitor.threshold == pytest.approx(chi2_quantile(1, 0.99))


def test_alpha_must_be_a_probability(sampler_config):
    with pytest.raises(ConfigurationError):
        ChannelMonitor(sampler_config, alpha=1.0)


def test_stable_stream_rarely_alarms(ar1_series):
    """Test a stream that keeps its pilot coefficients stays mostly quiet."""
    pilot = build_pilot(ar1_series[:2000], order=1)
    config = SamplerConfig(threshold_c=150.0, pilot=pilot, seed=3)
    verdicts = list(monitor_stream(to_samples(ar1_series), pilot, config, alpha=0.001, start_index=2000))
    assert len(verdicts) >= 3
    assert sum(v.alarm for v in verdicts) <= 2
    assert all(v.block_ref[0] >= 2000 for v in verdicts)


def test_coefficient_change_raises_alarm():
    """Test blocks after a sign flip of the AR coefficient exceed the threshold."""
    before = simulate_ar(ArProcessSpec(coeffs=[0.5], seed=21), 2000)
    after = simulate_ar(ArProcessSpec(coeffs=[-0.5], seed=22), 5000)
    stream = np.concatenate([before, after])
    pilot = build_pilot(before, order=1)
    config = SamplerConfig(threshold_c=500.0, pilot=pilot, seed=4)

    monitor = ChannelMonitor(config, alpha=0.001, start_index=2000)
    verdicts = list(monitor.process(to_samples(stream)))
    assert verdicts
    assert all(v.alarm for v in verdicts)
    assert monitor.alarms == monitor.verdicts == len(verdicts)
    assert all(v.beta_hat[0] < 0 for v in verdicts)


def test_degenerate_block_never_alarms():
    pilot = PilotModel(
        order=2,
        precision=np.eye(2),
        beta0=np.array([5.0, 5.0]),
        sigma0_sq=1e-6,
        n0=100,
    )
    block = SlsBlock(start=2, stop=21, values=np.ones(22), order=2, acc_info=40.0, method=Method.LEVERAGE)
    verdict = score_block(block, pilot, threshold=1.0)
    assert verdict.degenerate
    assert verdict.chi2 > 1.0
    assert not verdict.alarm


def test_events_reach_callback(ar1_series, sampler_config):
    seen = []
    monitor = ChannelMonitor(sampler_config, start_index=200, on_event=seen.append)
    verdicts = list(monitor.process(to_samples(ar1_series[:5000])))
    completed = [e for e in seen if e.tag is EventTag.BLOCK_COMPLETED]
    assert len(seen) == 4999
    assert len(completed) == len(verdicts)
    assert monitor.aborts == 0


def test_leverage_trace(ar1_series, ar1_pilot):
    trace = list(leverage_trace(to_samples(ar1_series[:1000]), ar1_pilot))
    assert len(trace) == 999
    assert trace[0][0] == 1
    expected = ar1_series[0] ** 2 * ar1_pilot.precision[0, 0]
    assert trace[0][1] == pytest.approx(expected)
    assert all(h >= 0 for _, h in trace)


def test_zero_signal_has_zero_leverage(ar1_pilot):
    trace = list(leverage_trace(to_samples(np.zeros(50)), ar1_pilot))
    assert len(trace) == 50 - ar1_pilot.order
    assert all(h == 0.0 for _, h in trace)


def test_block_matching_pilot_scores_zero():
    pilot = PilotModel(order=1, precision=np.array([[0.25]]), beta0=np.array([2.0]), sigma0_sq=1.0, n0=10)
    block = SlsBlock(start=1, stop=2, values=np.array([1.0, 2.0, 4.0]), order=1, acc_info=5.0, method=Method.LEVERAGE)
    verdict = score_block(block, pilot, threshold=3.84)
    assert verdict.chi2 == pytest.approx(0.0)
    assert not verdict.alarm


@pytest.mark.slow
def test_first_block_after_shift_alarms():
    """Test a jump from 0.3 to 0.95 is flagged by the first post-change block in nearly every run."""
    hits = 0
    for run in range(100):
        before = simulate_ar(ArProcessSpec(coeffs=[0.3], seed=1000 + run), 400)
        after = simulate_ar(ArProcessSpec(coeffs=[0.95], seed=5000 + run), 3000)
        pilot = build_pilot(before[:200], order=1)
        config = SamplerConfig(threshold_c=500.0, pilot=pilot, seed=run)
        monitor = ChannelMonitor(config, alpha=1e-3, start_index=before.shape[0])
        first = next(monitor.process(to_samples(np.concatenate([before, after]))), None)
        hits += bool(first is not None and first.alarm)
    assert hits >= 95


@pytest.mark.slow
def test_alarm_rate_on_pilot_matched_stream():
    """Test a stream drawn from the pilot's own fitted model alarms at no more than twice alpha."""
    alpha = 1e-3
    prefix = simulate_ar(ArProcessSpec(coeffs=[0.0], seed=60), 500)
    pilot = build_pilot(prefix, order=1, rescale=1e6)
    matched = ArProcessSpec(
        coeffs=[float(pilot.beta0[0])],
        innovation=GaussianInnovation(sigma=float(np.sqrt(pilot.sigma0_sq))),
        seed=61,
    )
    stream = simulate_ar(matched, 700_000)
    config = SamplerConfig(threshold_c=100.0, pilot=pilot, seed=62)

    monitor = ChannelMonitor(config, alpha=alpha)
    verdicts = list(itertools.islice(monitor.process(to_samples(stream)), 5000))
    assert len(verdicts) == 5000
    assert monitor.alarms <= 2 * alpha * len(verdicts)
