#!/usr/bin/env python3
"""
Monte Carlo Acceptance Script

Checks the sequential leverage sampler against its large-threshold theory:
- KS test of the normalized block error against N(0, 1), stable and near unit root
- KS test of the chi-square pivot against chi2_p for an AR(2)
- Fixed-width region coverage with c chosen from the pilot variance
- Block length per unit threshold against 1 - beta^2
- Unit-root block length scaling with c^{1/2}
- Leverage vs uniform median error and block size near the unit root
- Monitor alarm rate on a matched stream and power after a coefficient change

Usage:
    python scripts/run_acceptance.py --reps 2000 --output acceptance_results.json
    python scripts/run_acceptance.py --quick
"""

import argparse
import itertools
import json
import sys
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict
import numpy as np

# Add parent directory to path to import slstream modules
sys.path.insert(0, str(Path(__file__).parent.parent))

from slstream.core.exceptions import SlsException
from slstream.core.rng import derive_seed
from slstream.evaluation.harness import (
    coverage_experiment,
    efficiency_experiment,
    normality_experiment,
    run_grid,
    unit_root_scaling,
)
from slstream.logging_config import setup_logging
from slstream.models.block import Method
from slstream.schemas.experiment import ExperimentSpec
from slstream.schemas.process import ArProcessSpec, GaussianInnovation
from slstream.schemas.sampler import SamplerConfig
from slstream.services.monitor import ChannelMonitor
from slstream.services.pilot import build_pilot
from slstream.services.timeseries import simulate_ar, stream_ar, to_samples


def _gaussian(coeffs) -> ArProcessSpec:
    return ArProcessSpec(coeffs=list(coeffs), innovation=GaussianInnovation(sigma=1.0))


def run_grid_ordering(n_rep: int, seed: int, workers: int) -> Dict[str, Any]:
    """Leverage vs uniform medians at beta=0.99, c=20000, t(4) innovations."""
    spec = ExperimentSpec(
        process=ArProcessSpec(coeffs=[0.99], innovation={"kind": "student_t", "df": 4}),
        methods=[Method.LEVERAGE, Method.UNIFORM],
        threshold_c=20000.0,
        n0=200,
        n_rep=n_rep,
        seed_base=seed,
    )
    report = run_grid(spec, workers)
    medians = {
        f"{method.value}_median_{metric}": report.distribution(method, metric).median
        for method in (Method.LEVERAGE, Method.UNIFORM)
        for metric in ("mse", "block_len")
    }
    medians["ok"] = None not in medians.values() and (
        medians["leverage_median_mse"] <= medians["uniform_median_mse"]
        and medians["leverage_median_block_len"] <= medians["uniform_median_block_len"]
    )
    return medians


def run_monitor_size(blocks: int, seed: int, alpha: float = 1e-3) -> Dict[str, Any]:
    """Alarm rate on a stream drawn from the pilot's own fitted AR(1)."""
    pilot = build_pilot(simulate_ar(ArProcessSpec(coeffs=[0.3], seed=seed), 500), order=1)
    matched = ArProcessSpec(
        coeffs=[float(pilot.beta0[0])],
        innovation=GaussianInnovation(sigma=float(np.sqrt(pilot.sigma0_sq))),
        seed=seed + 1,
    )
    config = SamplerConfig(threshold_c=100.0, pilot=pilot, seed=seed + 2)
    monitor = ChannelMonitor(config, alpha=alpha)
    stream = itertools.chain.from_iterable(stream_ar(matched, 10 ** 8))
    verdicts = list(itertools.islice(monitor.process(to_samples(stream)), blocks))
    rate = monitor.alarms / len(verdicts)
    return {"blocks": len(verdicts), "alarm_rate": rate, "alpha": alpha, "ok": rate <= 2 * alpha}


def run_monitor_power(runs: int, seed: int, alpha: float = 1e-3) -> Dict[str, Any]:
    """How often the first block after a [0.3] -> [0.95] change alarms."""
    hits = 0
    for run in range(runs):
        before = simulate_ar(ArProcessSpec(coeffs=[0.3], seed=derive_seed(seed, run, 0)), 400)
        after = simulate_ar(ArProcessSpec(coeffs=[0.95], seed=derive_seed(seed, run, 1)), 5000)
        pilot = build_pilot(before[:200], order=1)
        config = SamplerConfig(threshold_c=500.0, pilot=pilot, seed=derive_seed(seed, run, 2))
        monitor = ChannelMonitor(config, alpha=alpha, start_index=before.shape[0])
        first = next(monitor.process(to_samples(np.concatenate([before, after]))), None)
        hits += bool(first is not None and first.alarm)
    return {"runs": runs, "hits": hits, "ok": hits >= 0.95 * runs}


def run_acceptance(reps: int, workers: int, seed: int) -> Dict[str, Any]:
    """
    Run every acceptance experiment.

    Args:
        reps: replicates for the normality checks (others scale from it)
        workers: process pool size for replicates
        seed: seed_base shared by all experiments

    Returns:
        Dict of experiment name -> result dict
    """
    results: Dict[str, Any] = {}
    coverage_reps = max(reps // 2, 50)

    print(f"Normality, AR(1) beta=0.5, c=600 ({reps} replicates)...")
    results["normality_stable"] = normality_experiment(
        _gaussian([0.5]), 600.0, reps, seed_base=seed, workers=workers
    ).to_dict()

    for beta in (0.99, 1.0):
        print(f"Normality, AR(1) beta={beta}, c=1e4 ({reps // 2} replicates)...")
        results[f"normality_beta_{beta:g}"] = normality_experiment(
            _gaussian([beta]), 1e4, max(reps // 2, 50), seed_base=seed, workers=workers
        ).to_dict()

    print("Pivot, AR(2) beta=[0.75, -0.5], c=3000...")
    results["pivot_ar2"] = normality_experiment(
        _gaussian([0.75, -0.5]), 3000.0, max(reps // 2, 50), seed_base=seed, workers=workers
    ).to_dict()

    for coeffs in ([0.5], [0.75, -0.5]):
        label = ",".join(f"{b:g}" for b in coeffs)
        print(f"Coverage, beta=[{label}], d=0.05, alpha=0.05...")
        results[f"coverage_{label}"] = coverage_experiment(
            _gaussian(coeffs), 0.05, 0.05, coverage_reps, seed_base=seed, workers=workers
        ).to_dict()

    for beta in (0.0, 0.5, 0.9):
        print(f"Block size, beta={beta}, c=5000...")
        results[f"efficiency_beta_{beta:g}"] = efficiency_experiment(
            _gaussian([beta]), 5000.0, max(reps // 10, 20), seed_base=seed, workers=workers
        ).to_dict()

    print("Unit-root scaling...")
    scaling = unit_root_scaling([1e3, 1e4, 1e5], max(reps // 10, 20), seed_base=seed, workers=workers)
    results["unit_root_scaling"] = {f"{c:g}": v for c, v in scaling.items()}

    print("Grid ordering, beta=0.99, c=20000, t(4)...")
    results["grid_ordering"] = run_grid_ordering(max(reps // 20, 20), seed, workers)

    print("Monitor size, 500 blocks at alpha=1e-3...")
    results["monitor_size"] = run_monitor_size(500, seed)

    print("Monitor power, [0.3] -> [0.95]...")
    results["monitor_power"] = run_monitor_power(100, seed)
    return results


def print_results(results: Dict[str, Any], elapsed: float):
    """Pretty print acceptance results."""
    print("\n" + "="*60)
    print("ACCEPTANCE RESULTS")
    print("="*60)
    for name, result in results.items():
        if "passed" in result:
            status = "PASS" if result["passed"] else "FAIL"
            print(f"  {name:<28} {status}  (pivot KS p={result['pivot_ks']['p_value']:.4f})")
        elif "coverage" in result:
            inside = 0.92 <= result["coverage"] <= 0.97
            status = "PASS" if inside else "FAIL"
            print(f"  {name:<28} {status}  (coverage={result['coverage']:.4f})")
        elif "normalized_len_ratio" in result:
            inside = abs(result["normalized_len_ratio"] - 1.0) <= 0.1 and result["overshoot_ok"]
            status = "PASS" if inside else "FAIL"
            print(f"  {name:<28} {status}  (len ratio={result['normalized_len_ratio']:.4f})")
        elif "ok" in result:
            status = "PASS" if result["ok"] else "FAIL"
            details = ", ".join(f"{k}={v:.4g}" if v is not None else f"{k}=n/a" for k, v in result.items() if k != "ok")
            print(f"  {name:<28} {status}  ({details})")
        else:
            values = ", ".join(f"c={c}: {v:.3f}" for c, v in result.items())
            print(f"  {name:<28} {values}")
    print(f"\nElapsed:           {elapsed:.1f} s")
    print(f"Timestamp:         {datetime.now().isoformat()}")
    print("="*60 + "\n")


def save_results(results: Dict[str, Any], output_path: str):
    """Save acceptance results to JSON file."""
    with open(output_path, 'w') as f:
        json.dump(results, f, indent=2, sort_keys=True)
    print(f"✓ Results saved to {output_path}")


def main():
    parser = argparse.ArgumentParser(description="Run Monte Carlo acceptance checks")
    parser.add_argument(
        "--reps",
        type=int,
        default=2000,
        help="Replicates for the normality checks (default: 2000)"
    )
    parser.add_argument(
        "--quick",
        action="store_true",
        help="Run with 200 replicates"
    )
    parser.add_argument(
        "--workers",
        type=int,
        default=1,
        help="Process pool size (default: 1)"
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=2024,
        help="Seed base shared by all experiments"
    )
    parser.add_argument(
        "--output",
        type=str,
        default="acceptance_results.json",
        help="Output file for results"
    )

    args = parser.parse_args()
    setup_logging("WARNING")

    try:
        started = time.perf_counter()
        results = run_acceptance(200 if args.quick else args.reps, args.workers, args.seed)
        print_results(results, time.perf_counter() - started)
        save_results(results, args.output)
    except SlsException as e:
        print(f"Error during acceptance run: {e.message}")
        sys.exit(e.exit_code)


if __name__ == "__main__":
    main()
