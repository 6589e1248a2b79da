"""Synthetic paired microbiome / metabolome fixture.

Shape and cohort sizes follow the vaginal microbiome study the method was
developed for (49 taxa, 128 metabolites, 131 women: 79 normal, 45 BV or
intermediate, 7 undiagnosed). Values are simulated; the study data are not shipped.
"""
from typing import Tuple

import numpy as np

from ..simulator.rng import make_rng
from ..stats import PairedData


N_TAXA = 49
N_METABOLITES = 128
GROUP_SIZES = {'normal': 79, 'bv': 45, 'unknown': 7}

ZERO_PROBABILITY = 0.3
# (taxa, metabolites, loading in normal cohort, loading in bv cohort)
MODULES = (
    (slice(0, 8), slice(0, 16), 0., 0.9),
    (slice(8, 14), slice(16, 32), -0.8, 0.),
)


def make_paired_fixture(seed: int=0) -> Tuple[PairedData, np.ndarray]:
    """Returns (raw taxon counts paired with log metabolite abundances, cohort label per sample)."""
    rng = make_rng(seed)
    labels = np.repeat(list(GROUP_SIZES), list(GROUP_SIZES.values()))
    labels = labels[rng.permutation(len(labels))]
    m = len(labels)
    bv = labels == 'bv'

    log_rate = rng.normal(3., 1., size=N_TAXA)[np.newaxis, :] + rng.normal(0., 0.5, size=(m, N_TAXA))
    log_abundance = rng.normal(0., 1., size=(m, N_METABOLITES))

    for taxa, metabolites, normal_loading, bv_loading in MODULES:
        factor = rng.normal(size=m)
        loading = np.where(bv, bv_loading, normal_loading)
        log_rate[:, taxa] += factor[:, np.newaxis]
        log_abundance[:, metabolites] += (loading * factor)[:, np.newaxis]

    counts = rng.poisson(np.exp(log_rate)).astype(np.float64)
    counts[rng.random(counts.shape) < ZERO_PROBABILITY] = 0.

    data = PairedData(
        counts, log_abundance,
        names1=[f'taxon_{i + 1:02d}' for i in range(N_TAXA)],
        names2=[f'metabolite_{j + 1:03d}' for j in range(N_METABOLITES)],
        sample_ids=[f'S{k + 1:03d}' for k in range(m)],
    )
    return data, labels
