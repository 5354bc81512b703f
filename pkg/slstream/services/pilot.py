"""
Pilot analysis: BIC order selection, least-squares fit and precision matrix.
"""

from typing import Tuple
import numpy as np
from slstream.config import settings
from slstream.core.exceptions import (
    ConfigurationError,
    DegeneratePilotError,
    InsufficientDataError,
)
from slstream.core.linalg import pinv_sym, residual_variance, symmetrize
from slstream.models.pilot import PilotModel
from slstream.services.timeseries import design_matrix
from slstream.logging_config import get_logger

logger = get_logger(__name__)

# RSS below this fraction of the response energy is rounding noise.
_RSS_FLOOR = 1e-20


def fit_ar_ls(
    series,
    p: int,
    unbiased: bool = None
) -> Tuple[np.ndarray, float, np.ndarray]:
    """
    Least-squares AR(p) fit over the whole series.

    Args:
        series: observations X_1..X_n
        p: model order
        unbiased: divide RSS by rows - p instead of rows (defaults to settings)

    Returns:
        Tuple of (beta, sigma_sq, gram) with gram = Gamma^T Gamma
    """
    if p < 1:
        raise ConfigurationError(f"Order must be >= 1, got {p}")
    x = np.asarray(series, dtype=float)
    if x.shape[0] <= p:
        raise InsufficientDataError(f"Series of length {x.shape[0]} cannot fit order {p}")

    gamma, response = design_matrix(x, p)
    gram = symmetrize(gamma.T @ gamma)
    inv, _ = pinv_sym(gram)
    beta = inv @ (gamma.T @ response)
    resid = response - gamma @ beta
    sigma_sq = residual_variance(resid @ resid, gamma.shape[0], p, unbiased)
    return beta, sigma_sq, gram


def bic_scores(pilot, p_max: int) -> np.ndarray:
    """
    BIC(p) for p = 1..p_max, all scored on the common window of n0 - p_max rows.
    """
    x = np.asarray(pilot, dtype=float)
    n0 = x.shape[0]
    if p_max < 1:
        raise ConfigurationError(f"p_max must be >= 1, got {p_max}")
    if p_max >= n0 - 10:
        raise ConfigurationError(
            f"p_max={p_max} is too large for a pilot of {n0} samples (need p_max < n0 - 10)"
        )

    n_eff = n0 - p_max
    full_gamma, response = design_matrix(x, p_max)
    floor = _RSS_FLOOR * max(float(response @ response), np.finfo(float).tiny)

    scores = np.empty(p_max)
    for p in range(1, p_max + 1):
        gamma = full_gamma[:, :p]
        inv, _ = pinv_sym(gamma.T @ gamma)
        resid = response - gamma @ (inv @ (gamma.T @ response))
        rss = max(float(resid @ resid), floor)
        scores[p - 1] = n_eff * np.log(rss / n_eff) + p * np.log(n_eff)
    return scores


def select_order_bic(pilot, p_max: int = None) -> int:
    """
    Pick the AR order minimizing BIC; ties go to the smaller order.
    """
    p_max = settings.P_MAX if p_max is None else p_max
    scores = bic_scores(pilot, p_max)
    # np.argmin returns the first minimum, i.e. the smallest order on ties.
    return int(np.argmin(scores)) + 1


def estimate_precision(pilot, p: int, rtol: float = None) -> np.ndarray:
    """
    Plug-in precision matrix (Gamma_n0^T Gamma_n0)^dagger from the pilot.

    Raises:
        DegeneratePilotError: if the pilot Gram matrix is effectively singular
    """
    rtol = settings.PRECISION_RTOL if rtol is None else rtol
    gamma, _ = design_matrix(pilot, p)
    gram = symmetrize(gamma.T @ gamma)

    eigvals = np.linalg.eigvalsh(gram)
    smallest, largest = float(eigvals[0]), float(eigvals[-1])
    if largest <= 0.0 or smallest <= rtol * largest:
        logger.warning("degenerate_pilot", order=p, min_eigenvalue=smallest, max_eigenvalue=largest)
        raise DegeneratePilotError(smallest, largest)

    precision, _ = pinv_sym(gram)
    return precision


def build_pilot(
    pilot,
    p_max: int = None,
    order: int = None,
    rescale: float = 1.0,
    unbiased: bool = None
) -> PilotModel:
    """
    Run the full pilot analysis.

    Args:
        pilot: first n0 observations
        p_max: BIC grid upper bound (ignored when ``order`` is given)
        order: fixed order, skipping BIC
        rescale: multiplier for streaming leverage scores
        unbiased: residual variance convention

    Returns:
        Immutable PilotModel
    """
    x = np.asarray(pilot, dtype=float)
    n0 = x.shape[0]
    if rescale <= 0:
        raise ConfigurationError(f"rescale must be positive, got {rescale}")
    if not np.all(np.isfinite(x)):
        raise ConfigurationError("Pilot contains non-finite values")

    p = order if order is not None else select_order_bic(x, p_max)
    if p < 1:
        raise ConfigurationError(f"Order must be >= 1, got {p}")
    if n0 <= 10 * p:
        raise ConfigurationError(f"Pilot size n0={n0} must exceed 10 * order ({10 * p})")

    beta0, sigma0_sq, _ = fit_ar_ls(x, p, unbiased)
    if sigma0_sq <= 0.0:
        logger.warning("pilot_zero_residual", order=p, n0=n0)
        sigma0_sq = float(np.finfo(float).tiny)
    precision = estimate_precision(x, p)

    gamma, _ = design_matrix(x, p)
    leverage = rescale * np.einsum("ij,jk,ik->i", gamma, precision, gamma)
    start_rate = float(np.mean(np.minimum(np.clip(leverage, 0.0, None), 1.0)))

    model = PilotModel(
        order=p,
        precision=precision,
        beta0=np.asarray(beta0, dtype=float),
        sigma0_sq=float(sigma0_sq),
        n0=n0,
        rescale=float(rescale),
        start_rate=start_rate,
    )
    logger.info("pilot_built", order=p, n0=n0, sigma0_sq=model.sigma0_sq, start_rate=start_rate)
    return model
