"""Variational EM for the bipartite noisy stochastic block model.

Q(A, Z1, Z2) = P(A | Z1, Z2, X; theta) prod_i beta1[i, Z1_i] prod_j beta2[j, Z2_j]

Shapes: x (n1, n2), beta1 (n1, B1), beta2 (n2, B2), rho and d (n1, n2, B1, B2).
"""
from typing import Optional, Tuple, Union

import itertools
import logging

import numpy as np
from scipy.special import logsumexp, xlogy
from scipy.stats import norm
from sklearn.cluster import KMeans

from ..exceptions import DimensionError, FitError
from ..model import (
    Side, Dimensions, ZScoreMatrix, NullParams, AltParams, ModelParams, MembershipVector,
    to_values, log_edge_terms, log_marginal_tensor, responsibility_tensor,
    PI_CLAMP, VARIANCE_FLOOR,
)
from ..simulator.rng import make_rng, derive_seed
from .state import VariationalState, EStepWorkspace, FitOptions, FitResult


logger = logging.getLogger(__name__)

BETA_FLOOR = 1e-300
EMPTY_BLOCK_WEIGHT = 1e-12
INIT_CONFIDENCE = 0.95
INIT_P_THRESHOLD = 0.5
ENUMERATION_LIMIT = 2 ** 20

Matrix = Union[ZScoreMatrix, np.ndarray]


def initialize(x: Matrix, dims: Dimensions, seed: int) -> Tuple[VariationalState, ModelParams]:
    x = to_values(x)
    _check_dims(x, dims)

    beta1, fallback1 = _kmeans_memberships(x, dims.b1, derive_seed(seed, 0))
    beta2, fallback2 = _kmeans_memberships(x.T, dims.b2, derive_seed(seed, 1))

    # two-sided p < 0.5 under N(0, 1)
    candidate = (np.abs(x) > norm.isf(INIT_P_THRESHOLD / 2.)).astype(np.float64)
    rho = np.repeat(np.repeat(candidate[:, :, np.newaxis, np.newaxis], dims.b1, axis=2), dims.b2, axis=3)

    params = m_step(x, VariationalState(beta1, beta2, rho))
    state = VariationalState(
        beta1, beta2, responsibility_tensor(x, params), degenerate_init=fallback1 or fallback2
    )
    return state, params


def workspace(x: Matrix, params: ModelParams) -> EStepWorkspace:
    x = to_values(x)
    log_edge, log_no_edge = log_edge_terms(x, params)
    rho = np.exp(log_edge - np.logaddexp(log_edge, log_no_edge))
    return EStepWorkspace(edge_evidence(rho, log_edge, log_no_edge), rho)


def edge_evidence(rho: np.ndarray, log_edge: np.ndarray, log_no_edge: np.ndarray) -> np.ndarray:
    """d = rho log(pi g / rho) + (1 - rho) log((1 - pi) g0 / (1 - rho)) for arbitrary rho, 0 log 0 := 0."""
    return (
        rho * log_edge - xlogy(rho, rho)
        + (1. - rho) * log_no_edge - xlogy(1. - rho, 1. - rho)
    )


def e_step(
        x: Matrix, params: ModelParams, state: VariationalState, inner_iters: int=5,
        deterministic: bool=True
    ) -> VariationalState:

    ws = workspace(x, params)
    log_alpha1 = np.log(params.alpha1)
    log_alpha2 = np.log(params.alpha2)
    beta1, beta2 = state.beta1, state.beta2

    for _ in range(inner_iters):
        beta1 = _normalize_log_rows(log_alpha1 + _sum('ijql,jl->iq', ws.d, beta2, deterministic=deterministic))
        beta2 = _normalize_log_rows(log_alpha2 + _sum('ijql,iq->jl', ws.d, beta1, deterministic=deterministic))

    return state.copy(beta1=beta1, beta2=beta2, rho=ws.rho)


def m_step(
        x: Matrix, state: VariationalState, previous: Optional[ModelParams]=None,
        deterministic: bool=True
    ) -> ModelParams:

    x = to_values(x)
    beta1, beta2, rho = state.beta1, state.beta2, state.rho
    b1, b2 = beta1.shape[1], beta2.shape[1]

    alpha1 = beta1.mean(axis=0)
    alpha2 = beta2.mean(axis=0)

    block_weight = np.outer(beta1.sum(axis=0), beta2.sum(axis=0))
    edge_weight = _sum('iq,jl,ijql->ql', beta1, beta2, rho, deterministic=deterministic)

    if previous is not None:
        pi = previous.pi.copy()
    else:
        pi = np.full((b1, b2), 0.5)
    has_weight = block_weight > 0.
    pi[has_weight] = edge_weight[has_weight] / block_weight[has_weight]
    pi = np.clip(pi, PI_CLAMP, 1. - PI_CLAMP)

    null_weight = _sum('iq,jl,ijql->', beta1, beta2, 1. - rho, deterministic=deterministic)
    null_moment = _sum('iq,jl,ijql,ij->', beta1, beta2, 1. - rho, x ** 2, deterministic=deterministic)
    if null_weight > EMPTY_BLOCK_WEIGHT:
        sigma0_sq = max(null_moment / null_weight, VARIANCE_FLOOR)
    elif previous is not None:
        sigma0_sq = previous.null_params.sigma0_sq
    else:
        sigma0_sq = 1.

    frozen = edge_weight < EMPTY_BLOCK_WEIGHT
    safe_weight = np.where(frozen, 1., edge_weight)
    mu = _sum('iq,jl,ijql,ij->ql', beta1, beta2, rho, x, deterministic=deterministic) / safe_weight
    deviation = (x[:, :, np.newaxis, np.newaxis] - mu[np.newaxis, np.newaxis]) ** 2
    sigma_sq = _sum('iq,jl,ijql,ijql->ql', beta1, beta2, rho, deviation, deterministic=deterministic) / safe_weight
    sigma_sq = np.maximum(sigma_sq, VARIANCE_FLOOR)

    if np.any(frozen):
        kept_mu, kept_sigma_sq = _retained_alternative(x, rho, previous, (b1, b2))
        mu[frozen] = kept_mu[frozen]
        sigma_sq[frozen] = kept_sigma_sq[frozen]
        logger.warning("empty block(s) %s: alternative parameters frozen", np.argwhere(frozen).tolist())

    return ModelParams(
        alpha1 / alpha1.sum(), alpha2 / alpha2.sum(), pi,
        NullParams(sigma0_sq), AltParams(mu, sigma_sq, frozen),
    )


def elbo(x: Matrix, params: ModelParams, state: VariationalState, deterministic: bool=True) -> float:
    """sum beta1 log(alpha1 / beta1) + sum beta2 log(alpha2 / beta2) + sum beta1 beta2 d."""
    ws = workspace(x, params)
    value = (
        _membership_term(state.beta1, params.alpha1)
        + _membership_term(state.beta2, params.alpha2)
        + _sum('iq,jl,ijql->', state.beta1, state.beta2, ws.d, deterministic=deterministic)
    )
    return float(value)


def expected_complete_loglik(
        x: Matrix, params: ModelParams, state: VariationalState, deterministic: bool=True
    ) -> float:
    """E_Q[log L(X, A, Z1, Z2; theta)] with rho refreshed at ``params``."""
    x = to_values(x)
    log_edge, log_no_edge = log_edge_terms(x, params)
    rho = np.exp(log_edge - np.logaddexp(log_edge, log_no_edge))
    per_edge = rho * log_edge + (1. - rho) * log_no_edge
    value = (
        np.sum(state.beta1 @ np.log(params.alpha1))
        + np.sum(state.beta2 @ np.log(params.alpha2))
        + _sum('iq,jl,ijql->', state.beta1, state.beta2, per_edge, deterministic=deterministic)
    )
    return float(value)


def variational_entropy(
        x: Matrix, params: ModelParams, state: VariationalState, deterministic: bool=True
    ) -> float:
    """H(Q): membership entropies plus the conditional Bernoulli entropies of A."""
    rho = responsibility_tensor(to_values(x), params)
    bernoulli = -(xlogy(rho, rho) + xlogy(1. - rho, 1. - rho))
    value = (
        -np.sum(xlogy(state.beta1, state.beta1))
        - np.sum(xlogy(state.beta2, state.beta2))
        + _sum('iq,jl,ijql->', state.beta1, state.beta2, bernoulli, deterministic=deterministic)
    )
    return float(value)


def posterior_memberships(state: VariationalState) -> Tuple[MembershipVector, MembershipVector]:
    # np.argmax returns the first maximum, so ties go to the lowest block
    b1, b2 = state.beta1.shape[1], state.beta2.shape[1]
    return (
        MembershipVector.from_index(Side.Row, np.argmax(state.beta1, axis=1), b1),
        MembershipVector.from_index(Side.Column, np.argmax(state.beta2, axis=1), b2),
    )


def canonicalize(params: ModelParams, state: VariationalState) -> Tuple[ModelParams, VariationalState]:
    """Row blocks by descending alpha1 then ascending mean mu; columns likewise."""
    mu = params.alt_params.mu
    row_order = np.lexsort((mu.mean(axis=1), -params.alpha1))
    col_order = np.lexsort((mu.mean(axis=0), -params.alpha2))
    state = state.copy(
        beta1=state.beta1[:, row_order],
        beta2=state.beta2[:, col_order],
        rho=state.rho[:, :, row_order][:, :, :, col_order],
    )
    return params.permute(row_order, col_order), state


def fit(x: Matrix, dims: Dimensions, opts: Optional[FitOptions]=None) -> FitResult:
    if opts is None:
        opts = FitOptions()
    x = x.values if isinstance(x, ZScoreMatrix) else ZScoreMatrix(x).values
    _check_dims(x, dims)

    # a single block pair has no membership uncertainty, restarts would coincide
    n_restarts = 1 if dims.blocks == (1, 1) else opts.n_restarts

    best = None
    restart_elbos = []
    for r in range(n_restarts):
        with np.errstate(over='ignore', under='ignore'):
            run = _fit_once(x, dims, opts, r)
        restart_elbos.append(run.elbo)
        if not np.isfinite(run.elbo):
            logger.warning("restart %d diverged (elbo=%s)", r, run.elbo)
            continue
        if best is None or run.elbo > best.elbo:
            best = run

    if best is None:
        raise FitError(f"all {n_restarts} restarts diverged for {dims}")

    params, state = canonicalize(best.params, best.state)
    z1_hat, z2_hat = posterior_memberships(state)
    logger.info(
        "fit %s: restart %d selected, elbo=%.6f, %d iterations, converged=%s",
        dims, best.restart_index, best.elbo, best.n_iter, best.converged,
    )
    return FitResult(
        params, state, z1_hat, z2_hat, best.elbo_trace, best.converged, best.restart_index,
        best.n_iter, best.empty_block_events, restart_elbos,
    )


def exact_log_likelihood(x: Matrix, params: ModelParams) -> float:
    """log L(X; theta) by enumerating every membership assignment; tiny instances only."""
    x = to_values(x)
    n1, n2 = x.shape
    b1, b2 = params.blocks
    if b1 ** n1 * b2 ** n2 > ENUMERATION_LIMIT:
        raise ValueError(f"{b1}^{n1} x {b2}^{n2} assignments exceed the enumeration limit")

    log_marginal = log_marginal_tensor(x, params)
    log_alpha1, log_alpha2 = np.log(params.alpha1), np.log(params.alpha2)
    rows, cols = np.arange(n1)[:, np.newaxis], np.arange(n2)[np.newaxis, :]

    terms = []
    for z1 in itertools.product(range(b1), repeat=n1):
        z1 = np.array(z1)
        prior1 = log_alpha1[z1].sum()
        for z2 in itertools.product(range(b2), repeat=n2):
            z2 = np.array(z2)
            terms.append(
                prior1 + log_alpha2[z2].sum()
                + log_marginal[rows, cols, z1[:, np.newaxis], z2[np.newaxis, :]].sum()
            )
    return float(logsumexp(terms))


def _fit_once(x: np.ndarray, dims: Dimensions, opts: FitOptions, restart: int) -> FitResult:
    deterministic = opts.deterministic_reduction
    state, params = initialize(x, dims, derive_seed(opts.seed, restart))
    value = elbo(x, params, state, deterministic)
    trace = [value]
    converged = False
    empty_events = 0
    n_iter = 0

    for n_iter in range(1, opts.max_outer_iters + 1):
        state = e_step(x, params, state, opts.inner_iters, deterministic)
        params = m_step(x, state, params, deterministic)
        empty_events += int(params.alt_params.frozen.sum())
        new_value = elbo(x, params, state, deterministic)
        trace.append(new_value)
        logger.debug("restart %d iteration %d: elbo=%.10g", restart, n_iter, new_value)

        if not np.isfinite(new_value):
            value = new_value
            break
        if abs(new_value - value) < opts.elbo_rel_tol * max(abs(value), np.finfo(float).tiny):
            value = new_value
            converged = True
            break
        value = new_value

    state = state.copy(rho=responsibility_tensor(x, params), elbo=value)
    z1_hat, z2_hat = posterior_memberships(state)
    return FitResult(
        params, state, z1_hat, z2_hat, trace, converged, restart, n_iter, empty_events,
    )


def _kmeans_memberships(features: np.ndarray, n_blocks: int, seed: int) -> Tuple[np.ndarray, bool]:
    n = features.shape[0]
    if n_blocks == 1:
        return np.ones((n, 1)), False

    fallback = len(np.unique(features, axis=0)) < n_blocks
    if fallback:
        logger.warning("k-means degenerate (fewer than %d distinct profiles), using balanced random labels", n_blocks)
        labels = make_rng(seed).permutation(np.arange(n) % n_blocks)
    else:
        kmeans = KMeans(n_clusters=n_blocks, init='k-means++', n_init=1, random_state=seed % 2 ** 32)
        labels = kmeans.fit_predict(features)

    beta = np.full((n, n_blocks), (1. - INIT_CONFIDENCE) / (n_blocks - 1))
    beta[np.arange(n), labels] = INIT_CONFIDENCE
    return beta, fallback


def _retained_alternative(
        x: np.ndarray, rho: np.ndarray, previous: Optional[ModelParams], blocks: Tuple[int, int]
    ) -> Tuple[np.ndarray, np.ndarray]:

    if previous is not None:
        return previous.alt_params.mu, previous.alt_params.sigma_sq

    weight = rho.mean(axis=(2, 3))
    total = weight.sum()
    if total > EMPTY_BLOCK_WEIGHT:
        mu = np.sum(weight * x) / total
        sigma_sq = max(np.sum(weight * (x - mu) ** 2) / total, VARIANCE_FLOOR)
    else:
        mu, sigma_sq = 0., 1.
    return np.full(blocks, mu), np.full(blocks, sigma_sq)


def _normalize_log_rows(log_beta: np.ndarray) -> np.ndarray:
    beta = np.exp(log_beta - log_beta.max(axis=1, keepdims=True))
    beta /= beta.sum(axis=1, keepdims=True)
    beta = np.maximum(beta, BETA_FLOOR)
    return beta / beta.sum(axis=1, keepdims=True)


def _membership_term(beta: np.ndarray, alpha: np.ndarray) -> float:
    return float(np.sum(beta @ np.log(alpha)) - np.sum(xlogy(beta, beta)))


def _sum(subscripts: str, *operands: np.ndarray, deterministic: bool=True):
    # the unoptimised einsum loop has a fixed summation order and never calls threaded BLAS
    return np.einsum(subscripts, *operands, optimize=not deterministic)


def _check_dims(x: np.ndarray, dims: Dimensions) -> None:
    if x.shape != dims.shape:
        raise DimensionError(f"matrix shape {x.shape} does not match {dims}")
