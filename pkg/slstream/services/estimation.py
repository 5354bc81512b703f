"""
Least-squares inference on a single block plus the quantile functions it needs.
"""

from functools import lru_cache
from typing import Tuple
import numpy as np
from scipy.optimize import brentq
from scipy.special import gammainc, ndtr, ndtri
from slstream.core.exceptions import ConfigurationError
from slstream.core.linalg import pinv_sym, residual_variance, sqrt_psd, symmetrize
from slstream.models.block import BlockEstimate, ConfidenceRegion, SlsBlock
from slstream.services.timeseries import design_matrix


def block_ls(block: SlsBlock, p: int = None, unbiased: bool = None) -> BlockEstimate:
    """
    Least-squares estimate on one block's design matrix.

    A rank-deficient Gram matrix yields the minimum-norm solution with
    ``degenerate`` set.
    """
    p = block.order if p is None else p
    if p != block.order:
        raise ConfigurationError(f"Block carries {block.order} lags, asked for order {p}")

    gamma, response = block.design()
    gram = symmetrize(gamma.T @ gamma)
    inv, rank = pinv_sym(gram)
    beta_hat = inv @ (gamma.T @ response)
    resid = response - gamma @ beta_hat

    return BlockEstimate(
        beta_hat=beta_hat,
        gram=gram,
        sigma_hat_sq=residual_variance(resid @ resid, block.length, p, unbiased),
        block_len=block.length,
        info_trace=float(np.trace(gram)),
        degenerate=rank < p,
    )


def normalized_error(est: BlockEstimate, beta_true) -> np.ndarray:
    """(Gamma^T Gamma)^{1/2} (beta_hat - beta) with the symmetric square root."""
    diff = est.beta_hat - np.asarray(beta_true, dtype=float)
    return sqrt_psd(est.gram) @ diff


def pivot_chi2(est: BlockEstimate, beta_ref, sigma_sq: float) -> float:
    """(beta_hat - beta_ref)^T Gram (beta_hat - beta_ref) / sigma_sq."""
    if not sigma_sq > 0:
        raise ConfigurationError(f"sigma_sq must be positive, got {sigma_sq}")
    diff = est.beta_hat - np.asarray(beta_ref, dtype=float)
    return max(float(diff @ est.gram @ diff), 0.0) / sigma_sq


def _check_prob(prob: float) -> None:
    if not 0.0 < prob < 1.0:
        raise ConfigurationError(f"Probability must lie in (0, 1), got {prob}")


def chi2_cdf(x: float, dof: int) -> float:
    if x <= 0:
        return 0.0
    return float(gammainc(dof / 2.0, x / 2.0))


@lru_cache(maxsize=256)
def chi2_quantile(dof: int, prob: float) -> float:
    """
    Inverse chi-square CDF from the regularized lower incomplete gamma
    function and a bracketed root search.
    """
    if dof < 1:
        raise ConfigurationError(f"Degrees of freedom must be >= 1, got {dof}")
    _check_prob(prob)

    hi = float(max(dof, 1))
    while chi2_cdf(hi, dof) < prob:
        hi *= 2.0
    return float(brentq(lambda x: chi2_cdf(x, dof) - prob, 0.0, hi, xtol=1e-12, maxiter=500))


def normal_cdf(x: float) -> float:
    return float(ndtr(x))


@lru_cache(maxsize=256)
def normal_quantile(prob: float) -> float:
    _check_prob(prob)
    return float(ndtri(prob))


def confidence_region(est: BlockEstimate, d: float, alpha: float) -> ConfidenceRegion:
    """Fixed-width ellipsoid with radius^2 = d^2 tr(Gram)."""
    if not d > 0:
        raise ConfigurationError(f"d must be positive, got {d}")
    _check_prob(alpha)
    return ConfidenceRegion(
        center=est.beta_hat,
        shape=est.gram,
        radius_sq=d * d * est.info_trace,
        level=1.0 - alpha,
    )


def threshold_for_width(sigma_sq: float, alpha: float, d: float, p: int) -> float:
    """Information threshold c = sigma^2 a^2 / d^2 with a^2 the chi2_p (1 - alpha) quantile."""
    if not sigma_sq > 0 or not d > 0:
        raise ConfigurationError("sigma_sq and d must be positive")
    _check_prob(alpha)
    return sigma_sq * chi2_quantile(p, 1.0 - alpha) / (d * d)


def ar1_interval(est: BlockEstimate, c: float, sigma: float, alpha: float) -> Tuple[float, float]:
    """beta_hat -/+ c^{-1/2} sigma z_{1-alpha}; a (1 - 2 alpha)-level interval for AR(1)."""
    if est.order != 1:
        raise ConfigurationError(f"ar1_interval needs order 1, got {est.order}")
    if not c > 0 or not sigma > 0:
        raise ConfigurationError("c and sigma must be positive")
    half = sigma * normal_quantile(1.0 - alpha) / np.sqrt(c)
    center = float(est.beta_hat[0])
    return center - half, center + half


def predict_one_step(beta, series) -> np.ndarray:
    """One-step-ahead predictions for X_{p+1}..X_n."""
    beta = np.asarray(beta, dtype=float)
    gamma, _ = design_matrix(series, beta.shape[0])
    return gamma @ beta


def prediction_mse(beta, series) -> float:
    """Mean squared one-step prediction error on held-out data."""
    beta = np.asarray(beta, dtype=float)
    gamma, response = design_matrix(series, beta.shape[0])
    resid = response - gamma @ beta
    return float(resid @ resid) / resid.shape[0]
