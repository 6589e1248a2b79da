from typing import Tuple, Union

import logging

import numpy as np
from scipy.stats import norm

from ..exceptions import DimensionError
from ..model import ZScoreMatrix, MembershipVector, ModelParams, log_null_density, to_values


logger = logging.getLogger(__name__)


class LValueMatrix:

    def __init__(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=np.float64)
        if values.ndim not in (1, 2):
            raise DimensionError(f"l-values must be 1-d or 2-d, got {values.ndim}-d")
        if np.any(~np.isfinite(values)) or np.any(values < 0.) or np.any(values > 1.):
            raise ValueError("l-values must lie in [0, 1]")
        self.values = values


    @property
    def dims(self) -> Tuple[int, ...]:
        return self.values.shape


class DecisionReport:

    def __init__(
            self, l_values: LValueMatrix, tau: float, decisions: np.ndarray,
            est_mfdr: float, alpha: float
        ) -> None:

        self.l_values = l_values
        self.tau = tau
        self.decisions = decisions
        self.est_mfdr = est_mfdr
        self.alpha = alpha


    @property
    def n_rejected(self) -> int:
        return int(self.decisions.sum())


    def __repr__(self) -> str:
        return (
            f'DecisionReport(alpha={self.alpha}, tau={self.tau:.6g}, '
            f'n_rejected={self.n_rejected}, est_mfdr={self.est_mfdr:.6g})'
        )


def l_values(
        x: Union[ZScoreMatrix, np.ndarray], z1: MembershipVector, z2: MembershipVector,
        params: ModelParams
    ) -> LValueMatrix:
    """Posterior null probability of every entry given the block pair of its row and column.

    Prior probabilities of exactly 0 or 1 are honoured (no clamping), so such
    blocks give l-values of exactly 1 or 0.
    """
    x = to_values(x)
    if (len(z1), len(z2)) != x.shape:
        raise DimensionError(f"memberships ({len(z1)}, {len(z2)}) do not match matrix {x.shape}")
    if (z1.n_blocks, z2.n_blocks) != params.blocks:
        raise DimensionError(
            f"memberships have blocks ({z1.n_blocks}, {z2.n_blocks}), parameters {params.blocks}"
        )

    grid = np.ix_(z1.index, z2.index)
    pi = params.pi[grid]
    alt = params.alt_params
    with np.errstate(divide='ignore'):
        log_edge = np.log(pi) + norm.logpdf(x, loc=alt.mu[grid], scale=np.sqrt(alt.sigma_sq[grid]))
        log_no_edge = np.log1p(-pi) + log_null_density(x, params.null_params)
    values = np.exp(log_no_edge - np.logaddexp(log_edge, log_no_edge))
    return LValueMatrix(np.clip(values, 0., 1.))


def running_mean_threshold(values: np.ndarray, alpha: float) -> Tuple[float, float]:
    """Largest threshold whose rejected set has mean value <= alpha.

    Candidates are restricted to the last element of each tie group, so every
    value equal to the threshold is rejected. Returns (-1, 0) when nothing qualifies.
    """
    if not 0. < alpha <= 1.:
        raise ValueError(f"'alpha' must be in range (0., 1.], got {alpha}")

    ordered = np.sort(np.ravel(values))
    if len(ordered) == 0:
        return -1., 0.

    means = np.cumsum(ordered) / np.arange(1, len(ordered) + 1)
    group_end = np.append(ordered[1:] != ordered[:-1], True)
    admissible = np.flatnonzero(group_end & (means <= alpha))
    if len(admissible) == 0:
        return -1., 0.

    k = admissible[-1]
    return float(ordered[k]), float(means[k])


def mfdr_threshold(l: LValueMatrix, alpha: float) -> Tuple[float, float]:
    tau, est_mfdr = running_mean_threshold(l.values, alpha)
    logger.debug("mfdr threshold at alpha=%g: tau=%g, est_mfdr=%g", alpha, tau, est_mfdr)
    return tau, est_mfdr


def decide(l: LValueMatrix, tau: float) -> np.ndarray:
    return (l.values <= tau).astype(np.int8)


def report(l: LValueMatrix, alpha: float) -> DecisionReport:
    tau, est_mfdr = mfdr_threshold(l, alpha)
    return DecisionReport(l, tau, decide(l, tau), est_mfdr, alpha)
