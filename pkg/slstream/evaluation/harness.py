"""
Replicated simulation experiments for the sequential samplers.

Every replicate derives its own seed from (seed_base, replicate), so results do
not depend on execution order and any replicate can be replayed alone.
Timings cover sampling and estimation only; stream generation is excluded.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple
import time
import numpy as np
from slstream.config import settings
from slstream.core.exceptions import ConfigurationError, DataError
from slstream.core.rng import derive_seed
from slstream.evaluation.metrics import (
    Distribution,
    KsResult,
    coefficient_errors,
    coverage_rate,
    ks_chi2,
    ks_normal,
    measure_latency,
)
from slstream.models.block import EventTag, Method, SlsBlock
from slstream.models.pilot import PilotModel
from slstream.schemas.experiment import ExperimentSpec, SweepConfig
from slstream.schemas.process import ArProcessSpec, GaussianInnovation
from slstream.schemas.sampler import SamplerConfig
from slstream.services.estimation import (
    block_ls,
    confidence_region,
    normalized_error,
    pivot_chi2,
    prediction_mse,
    threshold_for_width,
)
from slstream.services.pilot import build_pilot
from slstream.services.sampler import SequentialSampler, fixed_length_block, replay_block
from slstream.services.timeseries import classify_stability, stream_ar, to_samples
from slstream.logging_config import get_logger

logger = get_logger(__name__)

CHUNK_SIZE = 65536

timed_block_ls = measure_latency(block_ls)


def cell_label(coeffs: Sequence[float], threshold_c: float) -> str:
    return f"beta={','.join(f'{b:g}' for b in coeffs)};c={threshold_c:g}"


def replicate_seed(seed_base: int, replicate: int) -> int:
    return derive_seed(seed_base, replicate)


def stream_prefix(process: ArProcessSpec, n: int) -> np.ndarray:
    """First ``n`` values of the chunked stream (bit-identical to what samplers see)."""
    return np.concatenate(list(stream_ar(process, n, CHUNK_SIZE)))


def first_block(
    chunks: Iterable[np.ndarray],
    config: SamplerConfig,
    method: Method,
    start_index: int
) -> Tuple[Optional[SlsBlock], float, Optional[str]]:
    """
    Run a sampler until its first block completes.

    Returns:
        Tuple of (block or None, sampling seconds, failure reason or None)
    """
    sampler = SequentialSampler(config, method, start_index)
    elapsed = 0.0
    offset = 0
    for chunk in chunks:
        started = time.perf_counter()
        for event in sampler.run(to_samples(chunk, offset), stop_after=1):
            if event.tag is EventTag.BLOCK_COMPLETED:
                return event.block, elapsed + time.perf_counter() - started, None
            if event.tag is EventTag.SAFEGUARD_ABORT:
                return None, elapsed + time.perf_counter() - started, "safeguard_abort"
        elapsed += time.perf_counter() - started
        offset += chunk.shape[0]
    return None, elapsed, "no_block_within_cap"


def _map(fn: Callable, items: Sequence, workers: int = None) -> List:
    workers = settings.BENCH_WORKERS if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass
class ReplicateRecord:
    """One (replicate, method) outcome; failures are kept, never dropped."""
    cell: str
    replicate: int
    seed: int
    method: Method
    ok: bool
    beta_hat: List[float] = field(default_factory=list)
    coord_errors: List[float] = field(default_factory=list)
    mse: Optional[float] = None
    seconds: Optional[float] = None
    block_len: Optional[int] = None
    acc_info: Optional[float] = None
    start: Optional[int] = None
    failure: Optional[str] = None

    def to_row(self, include_timing: bool = True) -> Dict[str, Any]:
        row = {
            "cell": self.cell,
            "replicate": self.replicate,
            "seed": self.seed,
            "method": self.method.value,
            "ok": self.ok,
            "mse": self.mse,
            "coord_errors": ";".join(repr(e) for e in self.coord_errors),
            "block_len": self.block_len,
            "acc_info": self.acc_info,
            "start": self.start,
            "failure": self.failure or "",
        }
        if include_timing:
            row["seconds"] = self.seconds
        return row


@dataclass
class ExperimentReport:
    """Per-method distributions for one grid cell plus the raw records."""
    cell: str
    spec: ExperimentSpec
    records: List[ReplicateRecord] = field(default_factory=list)

    def for_method(self, method: Method) -> List[ReplicateRecord]:
        return [r for r in self.records if r.method is method]

    def distribution(self, method: Method, metric: str) -> Distribution:
        dist = Distribution()
        for record in self.for_method(method):
            if record.ok:
                dist.add(getattr(record, metric))
        return dist

    def failures(self, method: Method) -> int:
        return sum(1 for r in self.for_method(method) if not r.ok)

    def summary(self, include_timing: bool = True) -> Dict[str, Any]:
        metrics = ["mse", "block_len"] + (["seconds"] if include_timing else [])
        methods = {}
        for method in self.spec.methods:
            methods[method.value] = {
                "successes": len(self.for_method(method)) - self.failures(method),
                "failures": self.failures(method),
                **{m: self.distribution(method, m).to_dict() for m in metrics},
            }
        return {
            "cell": self.cell,
            "coeffs": self.spec.process.coeffs,
            "threshold_c": self.spec.threshold_c,
            "n0": self.spec.n0,
            "n_rep": self.spec.n_rep,
            "methods": methods,
        }

    def rows(self, include_timing: bool = True) -> List[Dict[str, Any]]:
        return [r.to_row(include_timing) for r in self.records]


def run_replicate(spec: ExperimentSpec, replicate: int) -> List[ReplicateRecord]:
    """Fresh stream, pilot of size n0, one block per method, LS estimate."""
    cell = cell_label(spec.process.coeffs, spec.threshold_c)
    seed = replicate_seed(spec.seed_base, replicate)
    process = spec.process.with_seed(seed)
    cap = spec.stream_len_cap or settings.stream_cap(spec.threshold_c)
    need = spec.n0 + (spec.fixed_length if Method.FIXED_LENGTH in spec.methods else 0)
    if cap < need:
        raise ConfigurationError(f"stream_len_cap={cap} is shorter than n0 + fixed_length={need}")

    def failed(method: Method, reason: str) -> ReplicateRecord:
        logger.warning("replicate_failed", cell=cell, replicate=replicate, method=method.value, reason=reason)
        return ReplicateRecord(cell, replicate, seed, method, ok=False, failure=reason)

    prefix = stream_prefix(process, need)
    try:
        pilot = build_pilot(prefix[:spec.n0], p_max=spec.p_max)
    except DataError as e:
        return [failed(m, f"pilot: {e.message}") for m in spec.methods]

    config = SamplerConfig(threshold_c=spec.threshold_c, pilot=pilot, seed=derive_seed(seed, 1))
    records = []
    for method in spec.methods:
        if method is Method.FIXED_LENGTH:
            started = time.perf_counter()
            block = fixed_length_block(prefix, spec.n0, spec.fixed_length, pilot.order)
            sampling_seconds, failure = time.perf_counter() - started, None
        else:
            block, sampling_seconds, failure = first_block(
                stream_ar(process, cap, CHUNK_SIZE), config, method, spec.n0
            )
        if block is None:
            records.append(failed(method, failure))
            continue

        est, latency_ms = timed_block_ls(block)
        errors = coefficient_errors(est.beta_hat, process.coeffs)
        records.append(ReplicateRecord(
            cell=cell,
            replicate=replicate,
            seed=seed,
            method=method,
            ok=True,
            beta_hat=est.beta_hat.tolist(),
            coord_errors=errors.tolist(),
            mse=float(errors @ errors),
            seconds=sampling_seconds + latency_ms / 1000.0,
            block_len=block.length,
            acc_info=block.acc_info,
            start=block.start,
        ))
    return records


def run_grid(spec: ExperimentSpec, workers: int = None) -> ExperimentReport:
    """Replicate one (process, c) cell ``n_rep`` times for every method."""
    report = ExperimentReport(cell=cell_label(spec.process.coeffs, spec.threshold_c), spec=spec)
    for records in _map(partial(run_replicate, spec), list(range(spec.n_rep)), workers):
        report.records.extend(records)
    logger.info(
        "experiment_completed",
        cell=report.cell,
        n_rep=spec.n_rep,
        failures={m.value: report.failures(m) for m in spec.methods},
    )
    return report


def _pilot_for(process: ArProcessSpec, n0: int, order: int = None) -> PilotModel:
    return build_pilot(stream_prefix(process, n0), order=order or process.order)


@dataclass
class NormalityResult:
    coordinate_ks: List[KsResult]
    pivot_ks: KsResult
    successes: int
    failures: int

    def passed(self, level: float = 0.01) -> bool:
        return self.pivot_ks.passed(level) and all(k.passed(level) for k in self.coordinate_ks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "coordinate_ks": [k.to_dict() for k in self.coordinate_ks],
            "pivot_ks": self.pivot_ks.to_dict(),
            "successes": self.successes,
            "failures": self.failures,
            "passed": self.passed(),
        }


def _leverage_block(process: ArProcessSpec, c: float, n0: int, seed: int, order: int = None):
    process = process.with_seed(seed)
    pilot = _pilot_for(process, n0, order)
    config = SamplerConfig(threshold_c=c, pilot=pilot, seed=derive_seed(seed, 1))
    block, _, failure = first_block(
        stream_ar(process, settings.stream_cap(c), CHUNK_SIZE), config, Method.LEVERAGE, n0
    )
    return pilot, block, failure


def _normality_replicate(process: ArProcessSpec, c: float, n0: int, seed_base: int, replicate: int):
    _, block, _ = _leverage_block(process, c, n0, replicate_seed(seed_base, replicate))
    if block is None:
        return None
    est = block_ls(block)
    sigma_sq = process.innovation.variance
    return (
        normalized_error(est, process.coeffs) / np.sqrt(sigma_sq),
        pivot_chi2(est, process.coeffs, sigma_sq),
    )


def normality_experiment(
    process: ArProcessSpec,
    c: float,
    n_rep: int,
    n0: int = 200,
    seed_base: int = 0,
    workers: int = None
) -> NormalityResult:
    """
    KS checks of the normalized block error against N(0, 1) per coordinate
    and of the chi-square pivot against chi2_p, at the true order.
    """
    task = partial(_normality_replicate, process, c, n0, seed_base)
    outcomes = _map(task, list(range(n_rep)), workers)
    ok = [o for o in outcomes if o is not None]
    if not ok:
        raise DataError("No replicate completed a block")

    errors = np.vstack([o[0] for o in ok])
    pivots = [o[1] for o in ok]
    return NormalityResult(
        coordinate_ks=[ks_normal(errors[:, j]) for j in range(errors.shape[1])],
        pivot_ks=ks_chi2(pivots, process.order),
        successes=len(ok),
        failures=len(outcomes) - len(ok),
    )


@dataclass
class EfficiencyResult:
    mean_info_ratio: float
    mean_len_ratio: float
    expected_len_ratio: float
    overshoot_ok: bool
    successes: int
    failures: int

    @property
    def normalized_len_ratio(self) -> float:
        return self.mean_len_ratio / self.expected_len_ratio

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mean_info_ratio": self.mean_info_ratio,
            "mean_len_ratio": self.mean_len_ratio,
            "expected_len_ratio": self.expected_len_ratio,
            "normalized_len_ratio": self.normalized_len_ratio,
            "overshoot_ok": self.overshoot_ok,
            "successes": self.successes,
            "failures": self.failures,
        }


def _efficiency_replicate(process: ArProcessSpec, c: float, n0: int, seed_base: int, replicate: int):
    _, block, _ = _leverage_block(process, c, n0, replicate_seed(seed_base, replicate))
    if block is None:
        return None
    increments = replay_block(block)
    return block.length, block.acc_info, float(increments[-1])


def efficiency_experiment(
    process: ArProcessSpec,
    c: float,
    n_rep: int,
    n0: int = 200,
    seed_base: int = 0,
    workers: int = None
) -> EfficiencyResult:
    """
    Block-size and information-overshoot summary for a stable AR(1).

    Expected block length is c (1 - beta^2) / sigma^2 as c grows.
    """
    stability = classify_stability(process.coeffs)
    if process.order != 1 or not stability.is_stable:
        raise ConfigurationError("efficiency_experiment needs a stable AR(1) process")

    task = partial(_efficiency_replicate, process, c, n0, seed_base)
    outcomes = _map(task, list(range(n_rep)), workers)
    ok = [o for o in outcomes if o is not None]
    if not ok:
        raise DataError("No replicate completed a block")

    beta = process.coeffs[0]
    lengths = np.array([o[0] for o in ok], dtype=float)
    infos = np.array([o[1] for o in ok])
    last = np.array([o[2] for o in ok])
    return EfficiencyResult(
        mean_info_ratio=float(np.mean(infos / c)),
        mean_len_ratio=float(np.mean(lengths) / c),
        expected_len_ratio=(1.0 - beta * beta) / process.innovation.variance,
        overshoot_ok=bool(np.all((infos >= c) & (infos - c <= last))),
        successes=len(ok),
        failures=len(outcomes) - len(ok),
    )


def pilot_sensitivity(
    process: ArProcessSpec,
    c: float,
    n0_grid: Sequence[int],
    n_rep: int,
    seed_base: int = 0,
    methods: Sequence[Method] = None,
    workers: int = None
) -> Dict[int, ExperimentReport]:
    """
    Rerun one cell varying only n0. Seeds depend on the replicate only, so
    every n0 sees the same innovation streams.
    """
    too_small = [n0 for n0 in n0_grid if n0 <= 10 * process.order]
    if too_small:
        raise ConfigurationError(f"Pilot sizes {too_small} do not exceed 10 * order ({10 * process.order})")

    reports = {}
    for n0 in n0_grid:
        spec = ExperimentSpec(
            process=process,
            methods=list(methods or [Method.LEVERAGE, Method.UNIFORM, Method.FIXED_LENGTH]),
            threshold_c=c,
            n0=n0,
            n_rep=n_rep,
            seed_base=seed_base,
        )
        reports[n0] = run_grid(spec, workers)
    return reports


def median_ratio(reports: Dict[int, ExperimentReport], method: Method, metric: str = "mse") -> float:
    """Max over min of the per-n0 medians."""
    medians = [r.distribution(method, metric).median for r in reports.values()]
    medians = [m for m in medians if m is not None]
    if not medians or min(medians) <= 0:
        return float("inf")
    return max(medians) / min(medians)


@dataclass
class CoverageResult:
    coverage: float
    mean_threshold: float
    successes: int
    failures: int
    level: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "coverage": self.coverage,
            "mean_threshold": self.mean_threshold,
            "successes": self.successes,
            "failures": self.failures,
            "level": self.level,
        }


def _coverage_replicate(process: ArProcessSpec, d: float, alpha: float, n0: int, seed_base: int, replicate: int):
    seed = replicate_seed(seed_base, replicate)
    seeded = process.with_seed(seed)
    pilot = _pilot_for(seeded, n0)
    c = threshold_for_width(pilot.sigma0_sq, alpha, d, pilot.order)
    config = SamplerConfig(threshold_c=c, pilot=pilot, seed=derive_seed(seed, 1))
    block, _, _ = first_block(
        stream_ar(seeded, settings.stream_cap(c), CHUNK_SIZE), config, Method.LEVERAGE, n0
    )
    if block is None:
        return None
    region = confidence_region(block_ls(block), d, alpha)
    return region.contains(process.coeffs), c


def coverage_experiment(
    process: ArProcessSpec,
    d: float,
    alpha: float,
    n_rep: int,
    n0: int = 200,
    seed_base: int = 0,
    workers: int = None
) -> CoverageResult:
    """Empirical coverage of the fixed-width region with c = sigma0^2 a^2 / d^2."""
    task = partial(_coverage_replicate, process, d, alpha, n0, seed_base)
    outcomes = _map(task, list(range(n_rep)), workers)
    ok = [o for o in outcomes if o is not None]
    return CoverageResult(
        coverage=coverage_rate([o[0] for o in ok]),
        mean_threshold=float(np.mean([o[1] for o in ok])) if ok else float("nan"),
        successes=len(ok),
        failures=len(outcomes) - len(ok),
        level=1.0 - alpha,
    )


def unit_root_scaling(
    c_grid: Sequence[float],
    n_rep: int,
    n0: int = 200,
    sigma: float = 1.0,
    seed_base: int = 0,
    workers: int = None
) -> Dict[float, float]:
    """Mean block_len * c^{-1/2} per c for a random walk; roughly flat across c."""
    process = ArProcessSpec(coeffs=[1.0], innovation=GaussianInnovation(sigma=sigma), burn_in=0)
    result = {}
    for c in c_grid:
        task = partial(_efficiency_replicate, process, c, n0, seed_base)
        lengths = [o[0] for o in _map(task, list(range(n_rep)), workers) if o is not None]
        result[c] = float(np.mean(lengths) / np.sqrt(c)) if lengths else float("nan")
    return result


@dataclass
class SweepReport:
    """Prediction error on held-out data per threshold and method."""
    config: SweepConfig
    prediction_mse: Dict[float, Dict[Method, Distribution]] = field(default_factory=dict)
    seconds: Dict[float, Dict[Method, Distribution]] = field(default_factory=dict)
    block_len: Dict[float, Dict[Method, Distribution]] = field(default_factory=dict)
    failures: Dict[float, Dict[Method, int]] = field(default_factory=dict)

    @property
    def best_threshold(self) -> Optional[float]:
        medians = {
            c: d[Method.LEVERAGE].median
            for c, d in self.prediction_mse.items()
            if d[Method.LEVERAGE].median is not None
        }
        return min(medians, key=medians.get) if medians else None

    def summary(self, include_timing: bool = True) -> Dict[str, Any]:
        cells = []
        for c in self.config.thresholds:
            cell = {"threshold_c": c, "methods": {}}
            for method in (Method.LEVERAGE, Method.UNIFORM):
                cell["methods"][method.value] = {
                    "prediction_mse": self.prediction_mse[c][method].to_dict(),
                    "block_len": self.block_len[c][method].to_dict(),
                    "failures": self.failures[c][method],
                }
                if include_timing:
                    cell["methods"][method.value]["seconds"] = self.seconds[c][method].to_dict()
            cells.append(cell)
        return {"best_threshold": self.best_threshold, "cells": cells}


def _sweep_replicate(config: SweepConfig, c: float, replicate: int):
    seed = replicate_seed(config.seed_base, replicate)
    process = config.process.with_seed(seed)
    series = stream_prefix(process, config.train_len + config.test_len)
    train, test = series[:config.train_len], series[config.train_len:]
    pilot = build_pilot(train[:config.n0], p_max=config.p_max)
    sampler_config = SamplerConfig(threshold_c=c, pilot=pilot, seed=derive_seed(seed, 1))

    outcome = {}
    for method in (Method.LEVERAGE, Method.UNIFORM):
        block, seconds, _ = first_block([train], sampler_config, method, config.n0)
        if block is None:
            outcome[method] = None
            continue
        est, latency_ms = timed_block_ls(block)
        outcome[method] = (
            prediction_mse(est.beta_hat, test),
            seconds + latency_ms / 1000.0,
            block.length,
        )
    return outcome


def threshold_sweep(config: SweepConfig, workers: int = None) -> SweepReport:
    """Try several thresholds and score each by held-out one-step prediction error."""
    report = SweepReport(config=config)
    for c in config.thresholds:
        mse = {m: Distribution() for m in (Method.LEVERAGE, Method.UNIFORM)}
        secs = {m: Distribution() for m in (Method.LEVERAGE, Method.UNIFORM)}
        lens = {m: Distribution() for m in (Method.LEVERAGE, Method.UNIFORM)}
        fails = {m: 0 for m in (Method.LEVERAGE, Method.UNIFORM)}
        for outcome in _map(partial(_sweep_replicate, config, c), list(range(config.n_rep)), workers):
            for method, value in outcome.items():
                if value is None:
                    fails[method] += 1
                    continue
                mse[method].add(value[0])
                secs[method].add(value[1])
                lens[method].add(value[2])
        report.prediction_mse[c] = mse
        report.seconds[c] = secs
        report.block_len[c] = lens
        report.failures[c] = fails
    logger.info("threshold_sweep_completed", best_threshold=report.best_threshold)
    return report
