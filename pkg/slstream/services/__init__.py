from slstream.services.timeseries import (
    LagWindow,
    simulate_ar,
    stream_ar,
    classify_stability,
)
from slstream.services.pilot import (
    fit_ar_ls,
    select_order_bic,
    estimate_precision,
    build_pilot,
)
from slstream.services.sampler import (
    SequentialSampler,
    streaming_leverage,
    bernoulli_start,
    sls_step,
    uniform_step,
    fixed_length_block,
)
from slstream.services.estimation import (
    block_ls,
    normalized_error,
    pivot_chi2,
    chi2_quantile,
    normal_quantile,
    confidence_region,
    threshold_for_width,
    ar1_interval,
    prediction_mse,
)
from slstream.services.monitor import ChannelMonitor, monitor_stream, leverage_trace

__all__ = [
    "LagWindow",
    "simulate_ar",
    "stream_ar",
    "classify_stability",
    "fit_ar_ls",
    "select_order_bic",
    "estimate_precision",
    "build_pilot",
    "SequentialSampler",
    "streaming_leverage",
    "bernoulli_start",
    "sls_step",
    "uniform_step",
    "fixed_length_block",
    "block_ls",
    "normalized_error",
    "pivot_chi2",
    "chi2_quantile",
    "normal_quantile",
    "confidence_region",
    "threshold_for_width",
    "ar1_interval",
    "prediction_mse",
    "ChannelMonitor",
    "monitor_stream",
    "leverage_trace",
]
