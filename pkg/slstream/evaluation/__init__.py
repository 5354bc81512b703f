from slstream.evaluation.metrics import (
    ks_normal,
    ks_chi2,
    squared_error,
    coverage_rate,
    measure_latency,
    KsResult,
    Distribution,
)
from slstream.evaluation.harness import (
    run_grid,
    normality_experiment,
    efficiency_experiment,
    pilot_sensitivity,
    coverage_experiment,
    threshold_sweep,
    unit_root_scaling,
    ExperimentReport,
)

__all__ = [
    "ks_normal",
    "ks_chi2",
    "squared_error",
    "coverage_rate",
    "measure_latency",
    "KsResult",
    "Distribution",
    "run_grid",
    "normality_experiment",
    "efficiency_experiment",
    "pilot_sensitivity",
    "coverage_experiment",
    "threshold_sweep",
    "unit_root_scaling",
    "ExperimentReport",
]
