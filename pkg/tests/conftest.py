import os
import numpy as np
import pytest

# Set test environment before importing the package
os.environ["SLS_LOG_LEVEL"] = "WARNING"
os.environ["SLS_BENCH_WORKERS"] = "1"

from slstream.io.ingest import write_stream
from slstream.schemas.process import ArProcessSpec, GaussianInnovation, StudentTInnovation
from slstream.schemas.sampler import SamplerConfig
from slstream.services.pilot import build_pilot
from slstream.services.timeseries import simulate_ar


@pytest.fixture
def ar1_spec():
    """Stable Gaussian AR(1) with beta = 0.5."""
    return ArProcessSpec(coeffs=[0.5], innovation=GaussianInnovation(sigma=1.0), seed=11)


@pytest.fixture
def ar2_spec():
    return ArProcessSpec(coeffs=[0.6, -0.4], innovation=GaussianInnovation(sigma=1.0), seed=12)


@pytest.fixture
def heavy_tail_spec():
    return ArProcessSpec(coeffs=[-0.5], innovation=StudentTInnovation(df=4.0, scale=1.0), seed=13)


@pytest.fixture
def ar1_series(ar1_spec):
    return simulate_ar(ar1_spec, 20_000)


@pytest.fixture
def ar1_pilot(ar1_series):
    return build_pilot(ar1_series[:200], order=1)


@pytest.fixture
def sampler_config(ar1_pilot):
    """Leverage sampler config with a moderate threshold."""
    return SamplerConfig(threshold_c=500.0, pilot=ar1_pilot, seed=99)


@pytest.fixture
def stream_csv(tmp_path, ar1_series):
    """AR(1) series written as a single-column CSV file."""
    path = tmp_path / "stream.csv"
    write_stream(ar1_series, str(path), "csv")
    return path


@pytest.fixture
def shifted_csv(tmp_path):
    """2000 samples of beta = 0.5 followed by 5000 samples of beta = -0.5."""
    before = simulate_ar(ArProcessSpec(coeffs=[0.5], seed=21), 2000)
    after = simulate_ar(ArProcessSpec(coeffs=[-0.5], seed=22), 5000)
    path = tmp_path / "shifted.csv"
    write_stream(np.concatenate([before, after]), str(path), "csv")
    return path
