import math
import numpy as np
import pytest
from slstream.core.exceptions import ConfigurationError, DataError, NonFiniteSampleError
from slstream.models.timeseries import Sample, StabilityTag
from slstream.schemas.process import ArProcessSpec, GaussianInnovation, StudentTInnovation
from slstream.services.timeseries import (
    LagWindow,
    classify_stability,
    companion_matrix,
    design_matrix,
    draw_innovations,
    resolve_burn_in,
    simulate_ar,
    stream_ar,
    to_samples,
)


def test_lag_window_warms_up():
    """Test the window yields nothing until ``order`` samples were seen."""
    window = LagWindow(2)
    assert window.push(Sample(0, 1.0)) is None
    assert window.push(Sample(1, 2.0)) is None

    lag = window.push(Sample(2, 3.0))
    assert lag.index == 2
    assert lag.entries.tolist() == [2.0, 1.0]
    assert lag.sq_norm() == 5.0


def test_lag_window_most_recent_first():
    """Test regressors list the most recent lag first as the ring wraps."""
    window = LagWindow(3)
    lags = [window.push(s) for s in to_samples([1.0, 2.0, 3.0, 4.0, 5.0])]
    assert lags[3].entries.tolist() == [3.0, 2.0, 1.0]
    assert lags[4].entries.tolist() == [4.0, 3.0, 2.0]
    assert window.current().tolist() == [5.0, 4.0, 3.0]


def test_lag_window_rejects_non_finite():
    window = LagWindow(1)
    window.push(Sample(0, 1.0))
    with pytest.raises(NonFiniteSampleError) as exc:
        window.push(Sample(1, math.nan))
    assert exc.value.index == 1
    assert exc.value.exit_code == 3


def test_lag_window_rejects_index_gap():
    window = LagWindow(1)
    window.push(Sample(0, 1.0))
    with pytest.raises(DataError):
        window.push(Sample(2, 1.0))


def test_lag_window_rejects_bad_order():
    with pytest.raises(ConfigurationError):
        LagWindow(0)


def test_lag_window_memory_is_constant():
    window = LagWindow(4)
    before = window.nbytes()
    for sample in to_samples(np.arange(10_000, dtype=float)):
        window.push(sample)
    assert window.nbytes() == before


def test_companion_matrix_layout():
    companion = companion_matrix([0.5, -0.2, 0.1])
    assert companion[0].tolist() == [0.5, -0.2, 0.1]
    assert companion[1].tolist() == [1.0, 0.0, 0.0]
    assert companion[2].tolist() == [0.0, 1.0, 0.0]


@pytest.mark.parametrize("coeffs, tag", [
    ([0.5], StabilityTag.STABLE),
    ([-0.9], StabilityTag.STABLE),
    ([0.99], StabilityTag.STABLE),
    ([1.0], StabilityTag.UNIT_ROOT),
    ([-1.0], StabilityTag.UNIT_ROOT),
    ([1.05], StabilityTag.EXPLOSIVE),
    ([0.5, 0.5], StabilityTag.UNIT_ROOT),
    ([0.6, -0.4], StabilityTag.STABLE),
])
def test_classify_stability(coeffs, tag):
    """Test classification by the largest characteristic root modulus."""
    assert classify_stability(coeffs).tag is tag


def test_classify_stability_tolerance_band():
    assert classify_stability([1.0 - 1e-8]).tag is StabilityTag.UNIT_ROOT
    assert classify_stability([1.0 - 1e-8], tol=1e-10).tag is StabilityTag.STABLE


def test_classify_stability_needs_coefficients():
    with pytest.raises(ConfigurationError):
        classify_stability([])


def test_burn_in_defaults():
    assert resolve_burn_in(ArProcessSpec(coeffs=[0.5])) == 500
    assert resolve_burn_in(ArProcessSpec(coeffs=[1.0])) == 0
    assert resolve_burn_in(ArProcessSpec(coeffs=[0.5], burn_in=7)) == 7


def test_simulate_is_deterministic(ar1_spec):
    """Test the same process and length reproduce the same series."""
    a = simulate_ar(ar1_spec, 1000)
    b = simulate_ar(ar1_spec, 1000)
    c = simulate_ar(ar1_spec.with_seed(12345), 1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_simulate_stationary_variance():
    """Test a stable AR(1) settles at sigma^2 / (1 - beta^2)."""
    spec = ArProcessSpec(coeffs=[0.5], innovation=GaussianInnovation(sigma=1.0), seed=3)
    x = simulate_ar(spec, 200_000)
    assert abs(np.var(x) - 1.0 / (1.0 - 0.25)) < 0.05


def test_student_t_innovations_are_standardized():
    spec = ArProcessSpec(coeffs=[0.0], innovation=StudentTInnovation(df=5.0, scale=2.0), burn_in=0, seed=4)
    x = simulate_ar(spec, 200_000)
    assert abs(np.var(x) - 4.0) < 0.25


def test_simulate_overflow_is_a_data_error():
    spec = ArProcessSpec(coeffs=[2.0], burn_in=0, seed=6)
    with pytest.raises(DataError):
        simulate_ar(spec, 5000)


def test_simulate_rejects_empty_request(ar1_spec):
    with pytest.raises(ConfigurationError):
        simulate_ar(ar1_spec, 0)


def test_stream_matches_batch_simulation(ar2_spec):
    """Test chunked generation carries filter state across chunks."""
    batch = simulate_ar(ar2_spec, 10_000)
    streamed = np.concatenate(list(stream_ar(ar2_spec, 10_000, chunk_size=777)))
    assert streamed.shape == batch.shape
    assert np.allclose(streamed, batch, rtol=1e-10, atol=1e-12)


def test_stream_chunk_sizes(ar1_spec):
    sizes = [chunk.shape[0] for chunk in stream_ar(ar1_spec, 2500, chunk_size=1000)]
    assert sizes == [1000, 1000, 500]


def test_design_matrix_rows():
    gamma, response = design_matrix([1.0, 2.0, 3.0, 4.0, 5.0], 2)
    assert gamma.tolist() == [[2.0, 1.0], [3.0, 2.0], [4.0, 3.0]]
    assert response.tolist() == [3.0, 4.0, 5.0]


def test_design_matrix_too_short():
    with pytest.raises(DataError):
        design_matrix([1.0, 2.0], 2)


def test_white_noise_variance():
    spec = ArProcessSpec(coeffs=[0.0], innovation=GaussianInnovation(sigma=1.0), seed=31)
    assert 0.94 <= np.var(simulate_ar(spec, 10_000)) <= 1.06


def test_random_walk_differences_are_innovations():
    """Test a unit-root series is the cumulative sum of its innovations."""
    spec = ArProcessSpec(coeffs=[1.0], innovation=GaussianInnovation(sigma=1.0), burn_in=0, seed=32)
    x = simulate_ar(spec, 1000)
    innovations = draw_innovations(spec, np.random.default_rng(32), 1000)
    assert x[0] == pytest.approx(innovations[0])
    assert np.allclose(np.diff(x), innovations[1:], atol=1e-9)


def test_lag_one_autocorrelation():
    spec = ArProcessSpec(coeffs=[0.5], innovation=GaussianInnovation(sigma=1.0), seed=33)
    x = simulate_ar(spec, 100_000)
    assert abs(np.corrcoef(x[:-1], x[1:])[0, 1] - 0.5) < 0.02


def test_lag_vectors_rebuild_design_matrix(ar2_spec):
    """Test regressors emitted by the window equal the batch design matrix."""
    x = simulate_ar(ar2_spec, 500)
    window = LagWindow(2)
    rows = [lag.entries for lag in (window.push(s) for s in to_samples(x)) if lag is not None]
    gamma, _ = design_matrix(x, 2)
    assert np.array_equal(np.vstack(rows), gamma)


def test_scalar_root_modulus():
    assert classify_stability([0.5]).max_root_modulus == pytest.approx(0.5)
    assert classify_stability([0.99]).max_root_modulus == pytest.approx(0.99)
    assert classify_stability([-1.0]).max_root_modulus == pytest.approx(1.0)
