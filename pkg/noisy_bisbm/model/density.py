"""Gaussian null / alternative densities and edge responsibilities.

Everything is evaluated in log space; mixture ratios go through
``numpy.logaddexp`` so that |x| > 40 does not underflow. Block indices
``q``/``l`` are 0-based.
"""
from typing import Tuple, Union

import numpy as np
from scipy.stats import norm

from .params import ModelParams, NullParams, AltParams, PI_CLAMP


ArrayLike = Union[float, np.ndarray]


def log_null_density(x: ArrayLike, params: NullParams) -> ArrayLike:
    return norm.logpdf(x, loc=0., scale=np.sqrt(params.sigma0_sq))


def log_alt_density(x: ArrayLike, q: int, l: int, params: AltParams) -> ArrayLike:
    b1, b2 = params.blocks
    if not (0 <= q < b1 and 0 <= l < b2):
        raise IndexError(f"block ({q}, {l}) out of range for {b1}x{b2} blocks")
    return norm.logpdf(x, loc=params.mu[q, l], scale=np.sqrt(params.sigma_sq[q, l]))


def edge_responsibility(x: ArrayLike, q: int, l: int, params: ModelParams) -> ArrayLike:
    pi = np.clip(params.pi[q, l], PI_CLAMP, 1. - PI_CLAMP)
    log_edge = np.log(pi) + log_alt_density(x, q, l, params.alt_params)
    log_no_edge = np.log1p(-pi) + log_null_density(x, params.null_params)
    return np.exp(log_edge - np.logaddexp(log_edge, log_no_edge))


def log_alt_density_tensor(x: np.ndarray, params: AltParams) -> np.ndarray:
    """log g(x_ij; mu_ql, sigma_ql^2) for every entry and block pair, shape (n1, n2, B1, B2)."""
    return norm.logpdf(
        x[:, :, np.newaxis, np.newaxis],
        loc=params.mu[np.newaxis, np.newaxis],
        scale=np.sqrt(params.sigma_sq)[np.newaxis, np.newaxis],
    )


def log_edge_terms(x: np.ndarray, params: ModelParams) -> Tuple[np.ndarray, np.ndarray]:
    """Returns (log pi g, log (1-pi) g0), both of shape (n1, n2, B1, B2)."""
    pi = params.clamped_pi
    log_edge = np.log(pi) + log_alt_density_tensor(x, params.alt_params)
    log_no_edge = np.log1p(-pi) + log_null_density(x, params.null_params)[:, :, np.newaxis, np.newaxis]
    return log_edge, np.broadcast_to(log_no_edge, log_edge.shape)


def log_marginal_tensor(x: np.ndarray, params: ModelParams) -> np.ndarray:
    log_edge, log_no_edge = log_edge_terms(x, params)
    return np.logaddexp(log_edge, log_no_edge)


def responsibility_tensor(x: np.ndarray, params: ModelParams) -> np.ndarray:
    log_edge, log_no_edge = log_edge_terms(x, params)
    return np.exp(log_edge - np.logaddexp(log_edge, log_no_edge))
