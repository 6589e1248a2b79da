import logging

import numpy as np

from ..exceptions import InputError


logger = logging.getLogger(__name__)


def mclr(counts: np.ndarray) -> np.ndarray:
    """Modified centred log-ratio, row-wise.

    Positive entries become log(value) minus the mean log over the row's positive
    entries; zeros stay exactly zero. Rows are samples.
    """
    counts = np.asarray(counts, dtype=np.float64)
    if counts.ndim != 2:
        raise InputError(f"counts must be 2-d, got {counts.ndim}-d")
    if not np.all(np.isfinite(counts)) or np.any(counts < 0.):
        raise InputError("counts must be finite and nonnegative")

    positive = counts > 0.
    n_positive = positive.sum(axis=1)
    empty = np.flatnonzero(n_positive == 0)
    if len(empty) > 0:
        logger.warning("%d rows have no positive entries and are left at zero: %s", len(empty), empty.tolist())

    logs = np.log(np.where(positive, counts, 1.))
    centre = logs.sum(axis=1) / np.maximum(n_positive, 1)
    return np.where(positive, logs - centre[:, np.newaxis], 0.)
