"""Marginal multiple-testing procedures used as comparison baselines.

All of them ignore the bipartite structure and operate on the flattened vector
of statistics; matrix inputs are flattened and the decisions reshaped back.
"""
from typing import Tuple

import logging

import numpy as np
from scipy.special import erfc
from scipy.stats import gaussian_kde, norm

from .lvalues import running_mean_threshold


logger = logging.getLogger(__name__)

KDE_GRID_SIZE = 1024
STOREY_LAMBDA = 0.5


def p_from_z(z: np.ndarray) -> np.ndarray:
    """Two-sided p-value 2(1 - Phi(|z|)) = erfc(|z| / sqrt 2)."""
    return erfc(np.abs(np.asarray(z, dtype=np.float64)) / np.sqrt(2.))


def bh(p: np.ndarray, alpha: float) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    _check_p(p)
    _check_alpha(alpha)
    flat = p.ravel()
    m = len(flat)
    decisions = np.zeros(m, dtype=np.int8)
    if m == 0:
        return decisions.reshape(p.shape)

    order = np.argsort(flat, kind='stable')
    passed = np.flatnonzero(flat[order] <= np.arange(1, m + 1) * alpha / m)
    if len(passed) > 0:
        decisions[order[:passed[-1] + 1]] = 1
    return decisions.reshape(p.shape)


def storey_pi0(p: np.ndarray, lambda_tune: float=STOREY_LAMBDA) -> float:
    if not 0. <= lambda_tune < 1.:
        raise ValueError(f"'lambda_tune' must be in range [0., 1.), got {lambda_tune}")
    if lambda_tune == 0.:
        return 1.
    flat = np.ravel(p)
    count = max(int(np.sum(flat > lambda_tune)), 1)
    return float(min(1., count / ((1. - lambda_tune) * len(flat))))


def storey(p: np.ndarray, alpha: float, lambda_tune: float=STOREY_LAMBDA) -> np.ndarray:
    pi0 = storey_pi0(p, lambda_tune)
    logger.debug("storey pi0=%g at lambda=%g", pi0, lambda_tune)
    return bh(p, min(alpha / pi0, 1.))


def lfdr_values(z: np.ndarray, lambda_tune: float=STOREY_LAMBDA) -> np.ndarray:
    """Local fdr min(1, pi0 g0(z) / f(z)) with a known N(0, 1) null and a KDE marginal."""
    z = np.asarray(z, dtype=np.float64)
    flat = z.ravel()
    if not np.all(np.isfinite(flat)):
        raise ValueError("'z' must be finite")
    if len(flat) < 2 or np.ptp(flat) == 0.:
        return np.ones_like(z)

    pi0 = storey_pi0(p_from_z(flat), lambda_tune)
    kde = gaussian_kde(flat, bw_method='silverman')
    grid, density = _kde_on_grid(kde, flat)
    f_hat = np.interp(flat, grid, density)
    with np.errstate(divide='ignore'):
        lfdr = np.where(f_hat > 0., pi0 * norm.pdf(flat) / f_hat, 1.)
    return np.minimum(lfdr, 1.).reshape(z.shape)


def lfdr_threshold(z: np.ndarray, alpha: float, lambda_tune: float=STOREY_LAMBDA) -> np.ndarray:
    lfdr = lfdr_values(z, lambda_tune)
    tau, _ = running_mean_threshold(lfdr, alpha)
    return (lfdr <= tau).astype(np.int8)


def _kde_on_grid(kde: gaussian_kde, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    pad = 4. * np.sqrt(kde.covariance[0, 0])
    grid = np.linspace(z.min() - pad, z.max() + pad, KDE_GRID_SIZE)
    return grid, kde(grid)


def _check_p(p: np.ndarray) -> None:
    if np.any(~np.isfinite(p)) or np.any(p < 0.) or np.any(p > 1.):
        raise ValueError("p-values must lie in [0, 1]")


def _check_alpha(alpha: float) -> None:
    if not 0. < alpha <= 1.:
        raise ValueError(f"'alpha' must be in range (0., 1.], got {alpha}")
