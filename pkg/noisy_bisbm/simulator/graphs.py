from typing import Optional, Sequence

import logging

import numpy as np

from ..exceptions import DimensionError
from ..model import (
    Side, Dimensions, ModelParams, MembershipVector, AdjacencyMatrix, ZScoreMatrix,
)
from .rng import make_rng


logger = logging.getLogger(__name__)


class LatentTruth:

    def __init__(
            self, a: AdjacencyMatrix, z1: Optional[MembershipVector]=None,
            z2: Optional[MembershipVector]=None
        ) -> None:

        self.a = a
        self.z1 = z1
        self.z2 = z2

        n1, n2 = a.dims
        if z1 is not None and len(z1) != n1:
            raise DimensionError(f"row memberships have length {len(z1)}, expected {n1}")
        if z2 is not None and len(z2) != n2:
            raise DimensionError(f"column memberships have length {len(z2)}, expected {n2}")


    @property
    def dims(self):
        return self.a.dims


    @property
    def has_memberships(self) -> bool:
        return self.z1 is not None and self.z2 is not None


class PAConfig:

    def __init__(self, n1: int, lam: float=0.8, degree_choices: Sequence[int]=(2, 3, 4, 5, 6)) -> None:
        if n1 < 1:
            raise ValueError(f"'n1' must be >= 1, got {n1}")
        if not 0. <= lam <= 1.:
            raise ValueError(f"'lam' must be in range [0., 1.], got {lam}")
        degree_choices = sorted(set(int(d) for d in degree_choices))
        if len(degree_choices) == 0 or degree_choices[0] < 1:
            raise ValueError("'degree_choices' must be a nonempty set of positive integers")

        self.n1 = int(n1)
        self.lam = float(lam)
        self.degree_choices = np.array(degree_choices, dtype=np.int64)


def sample_bisbm(dims: Dimensions, params: ModelParams, seed: int) -> LatentTruth:
    if params.blocks != dims.blocks:
        raise DimensionError(f"parameters have blocks {params.blocks}, dimensions {dims.blocks}")

    rng = make_rng(seed)
    z1 = rng.choice(dims.b1, size=dims.n1, p=params.alpha1)
    z2 = rng.choice(dims.b2, size=dims.n2, p=params.alpha2)
    edge_probability = params.pi[np.ix_(z1, z2)]
    a = rng.random(dims.shape) < edge_probability

    return LatentTruth(
        AdjacencyMatrix(a),
        MembershipVector.from_index(Side.Row, z1, dims.b1),
        MembershipVector.from_index(Side.Column, z2, dims.b2),
    )


def sample_observations(truth: LatentTruth, params: ModelParams, seed: int) -> ZScoreMatrix:
    if not truth.has_memberships:
        raise DimensionError("block observations need row and column memberships")

    z1, z2 = truth.z1.index, truth.z2.index
    alt = params.alt_params
    grid = np.ix_(z1, z2)
    return _observe(
        truth.a.values, alt.mu[grid], alt.sigma_sq[grid], params.null_params.sigma0_sq, seed
    )


def observations_from_graph(
        a: AdjacencyMatrix, mu: float, sigma_sq: float, sigma0_sq: float, seed: int
    ) -> ZScoreMatrix:

    return _observe(a.values, np.full(a.dims, mu), np.full(a.dims, sigma_sq), sigma0_sq, seed)


def nested_graph(n1: int, n2: int) -> AdjacencyMatrix:
    """Edge iff i/(n1-1) + j/(n2-1) <= 1 (0-based), evaluated in integers."""
    if n1 < 2 or n2 < 2:
        raise DimensionError(f"nested graph needs n1, n2 >= 2, got ({n1}, {n2})")
    i = np.arange(n1)[:, np.newaxis]
    j = np.arange(n2)[np.newaxis, :]
    a = i * (n2 - 1) + j * (n1 - 1) <= (n1 - 1) * (n2 - 1)
    return AdjacencyMatrix(a)


def preferential_attachment(config: PAConfig, seed: int) -> AdjacencyMatrix:
    rng = make_rng(seed)
    col_degrees = np.zeros(0, dtype=np.int64)
    neighborhoods = []

    for _ in range(config.n1):
        d = int(rng.choice(config.degree_choices))
        neighbors = set()

        for _ in range(d):
            reuse = rng.random() < config.lam
            candidates = np.array(
                [k for k in range(len(col_degrees)) if k not in neighbors], dtype=np.int64
            )
            if reuse and len(candidates) > 0:
                weights = col_degrees[candidates].astype(np.float64)
                k = int(rng.choice(candidates, p=weights / weights.sum()))
            else:
                k = len(col_degrees)
                col_degrees = np.append(col_degrees, 0)
            neighbors.add(k)
            col_degrees[k] += 1

        neighborhoods.append(neighbors)

    a = np.zeros((config.n1, len(col_degrees)), dtype=np.int8)
    for i, neighbors in enumerate(neighborhoods):
        a[i, sorted(neighbors)] = 1

    logger.debug("preferential attachment graph: %d x %d, %d edges", a.shape[0], a.shape[1], a.sum())
    return AdjacencyMatrix(a)


def _observe(
        a: np.ndarray, mu: np.ndarray, sigma_sq: np.ndarray, sigma0_sq: float, seed: int
    ) -> ZScoreMatrix:

    rng = make_rng(seed)
    null = rng.normal(0., np.sqrt(sigma0_sq), size=a.shape)
    signal = rng.normal(mu, np.sqrt(sigma_sq))
    return ZScoreMatrix(np.where(a == 1, signal, null))
