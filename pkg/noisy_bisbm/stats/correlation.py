"""Pearson-correlation z-statistics between two feature blocks measured on the same samples.

Variances use the 1/m (population) convention throughout, so values differ from
the 1/(m-1) convention at small sample sizes.
"""
from typing import Optional, Sequence, Tuple

import logging

import numpy as np

from ..exceptions import DimensionError, InputError, ZeroVarianceError
from ..model import ZScoreMatrix


logger = logging.getLogger(__name__)

DEGENERATE_TOL = 1e-12
VARIANCE_FORMS = ('literal', 'cai_liu')


class PairedData:

    def __init__(
            self, y1: np.ndarray, y2: np.ndarray, names1: Optional[Sequence[str]]=None,
            names2: Optional[Sequence[str]]=None, sample_ids: Optional[Sequence[str]]=None
        ) -> None:

        y1 = np.asarray(y1, dtype=np.float64)
        y2 = np.asarray(y2, dtype=np.float64)
        if y1.ndim != 2 or y2.ndim != 2:
            raise DimensionError("paired blocks must be 2-d (samples x features)")
        if y1.shape[0] != y2.shape[0]:
            raise DimensionError(f"sample counts differ: {y1.shape[0]} vs {y2.shape[0]}")
        if y1.shape[0] < 2:
            raise InputError(f"at least 2 samples are needed, got {y1.shape[0]}")
        for name, y in (('y1', y1), ('y2', y2)):
            if not np.all(np.isfinite(y)):
                raise InputError(f"'{name}' contains non-finite values")

        self.y1 = y1
        self.y2 = y2
        self.names1 = list(names1) if names1 is not None else [f'y1[{i}]' for i in range(y1.shape[1])]
        self.names2 = list(names2) if names2 is not None else [f'y2[{j}]' for j in range(y2.shape[1])]
        self.sample_ids = list(sample_ids) if sample_ids is not None else [str(k) for k in range(y1.shape[0])]


    @property
    def m(self) -> int:
        return self.y1.shape[0]


    @property
    def n1(self) -> int:
        return self.y1.shape[1]


    @property
    def n2(self) -> int:
        return self.y2.shape[1]


    def subset(self, mask: np.ndarray) -> 'PairedData':
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (self.m,):
            raise DimensionError(f"sample mask has shape {mask.shape}, expected ({self.m},)")
        return PairedData(
            self.y1[mask], self.y2[mask], self.names1, self.names2,
            [s for s, keep in zip(self.sample_ids, mask) if keep],
        )


    def split(self, mask: np.ndarray) -> Tuple['PairedData', 'PairedData']:
        mask = np.asarray(mask, dtype=bool)
        return self.subset(mask), self.subset(~mask)


class CorrelationStats:

    def __init__(self, rho_hat: np.ndarray, s: np.ndarray, degenerate: np.ndarray) -> None:
        self.rho_hat = rho_hat
        self.s = s
        self.degenerate = degenerate


def standardize_columns(y: np.ndarray, names: Optional[Sequence[str]]=None) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    mean = y.mean(axis=0)
    std = y.std(axis=0)
    constant = np.flatnonzero(std <= DEGENERATE_TOL * np.maximum(1., np.abs(mean)))
    if len(constant) > 0:
        k = constant[0]
        raise ZeroVarianceError(names[k] if names is not None else str(k))
    return (y - mean) / std


def correlation_stats(data: PairedData, variance: str='literal') -> CorrelationStats:
    if variance not in VARIANCE_FORMS:
        raise ValueError(f"'variance' must be one of {VARIANCE_FORMS}, got '{variance}'")

    a = standardize_columns(data.y1, data.names1)
    b = standardize_columns(data.y2, data.names2)
    m = data.m
    rho = np.clip(a.T @ b / m, -1., 1.)

    s = np.zeros_like(rho)
    for k in range(m):
        ak = a[k][:, np.newaxis]
        bk = b[k][np.newaxis, :]
        if variance == 'literal':
            term = 2. * ak * bk - rho * ak - rho * bk
        else:
            term = 2. * ak * bk - rho * ak ** 2 - rho * bk ** 2
        s += term ** 2
    s /= m

    return CorrelationStats(rho, s, s < DEGENERATE_TOL)


def pearson_z(data: PairedData, variance: str='literal') -> Tuple[ZScoreMatrix, CorrelationStats]:
    """x_ij = 2 rho_ij / sqrt(s_ij / m).

    ``variance='literal'`` uses s = mean_k (2 a b - rho a - rho b)^2;
    ``variance='cai_liu'`` squares the standardised terms, s = mean_k (2 a b - rho a^2 - rho b^2)^2.
    Entries with s below 1e-12 are set to 0 and flagged in ``stats.degenerate``.
    """
    stats = correlation_stats(data, variance)
    x = _ratio(2. * stats.rho_hat, stats.s / data.m)
    _log_degenerate(stats.degenerate)
    return ZScoreMatrix(x), stats


def two_sample_z(group1: PairedData, group2: PairedData, variance: str='literal') -> ZScoreMatrix:
    z, _ = two_sample_stats(group1, group2, variance)
    return z


def two_sample_stats(
        group1: PairedData, group2: PairedData, variance: str='literal'
    ) -> Tuple[ZScoreMatrix, np.ndarray]:
    """Returns the z matrix and the degenerate mask of the combined variance term."""
    if (group1.n1, group1.n2) != (group2.n1, group2.n2):
        raise DimensionError(
            f"group feature counts differ: ({group1.n1}, {group1.n2}) vs ({group2.n1}, {group2.n2})"
        )
    stats1 = correlation_stats(group1, variance)
    stats2 = correlation_stats(group2, variance)
    combined = stats1.s / group1.m + stats2.s / group2.m
    degenerate = combined < DEGENERATE_TOL
    x = _ratio(2. * (stats1.rho_hat - stats2.rho_hat), combined)
    _log_degenerate(degenerate)
    return ZScoreMatrix(x), degenerate


def _ratio(numerator: np.ndarray, variance: np.ndarray) -> np.ndarray:
    safe = np.where(variance < DEGENERATE_TOL, 1., variance)
    return np.where(variance < DEGENERATE_TOL, 0., numerator / np.sqrt(safe))


def _log_degenerate(degenerate: np.ndarray) -> None:
    count = int(degenerate.sum())
    if count > 0:
        logger.warning("%d degenerate entries (variance term < %g) set to 0", count, DEGENERATE_TOL)
