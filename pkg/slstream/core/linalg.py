"""Symmetric-matrix helpers shared by pilot fitting and block estimation."""

import numpy as np
from slstream.config import settings


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def pinv_sym(matrix: np.ndarray, rtol: float = None):
    """
    Moore-Penrose inverse of a symmetric PSD matrix by eigenvalue truncation.

    Eigenvalues at or below ``rtol`` times the largest are treated as zero.

    Returns:
        Tuple of (pseudoinverse, rank)
    """
    rtol = settings.PINV_RTOL if rtol is None else rtol
    eigvals, eigvecs = np.linalg.eigh(symmetrize(matrix))
    top = eigvals.max(initial=0.0)
    if top <= 0.0:
        return np.zeros_like(matrix, dtype=float), 0
    keep = eigvals > rtol * top
    inv = (eigvecs[:, keep] / eigvals[keep]) @ eigvecs[:, keep].T
    return symmetrize(inv), int(keep.sum())


def sqrt_psd(matrix: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root; negative rounding noise is clipped to zero."""
    eigvals, eigvecs = np.linalg.eigh(symmetrize(matrix))
    root = (eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.T
    return symmetrize(root)


def residual_variance(rss: float, rows: int, p: int, unbiased: bool = None) -> float:
    """
    RSS divided by rows - p (unbiased) or by rows (plain mean).

    Falls back to the plain mean when rows <= p.
    """
    unbiased = settings.uses_unbiased_sigma if unbiased is None else unbiased
    dof = rows - p if unbiased and rows > p else rows
    return float(rss) / dof
