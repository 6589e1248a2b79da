from typing import Optional, Sequence, Tuple, Union

from enum import IntEnum

import numpy as np

from ..exceptions import DimensionError, InputError


PI_CLAMP = 1e-10
VARIANCE_FLOOR = 1e-8


class Side(IntEnum):
    Row = 0
    Column = 1

    @property
    def opposite(self) -> 'Side':
        if self == Side.Row:
            return Side.Column
        return Side.Row


class Dimensions:

    def __init__(self, n1: int, n2: int, b1: int=1, b2: int=1) -> None:
        self.n1 = int(n1)
        self.n2 = int(n2)
        self.b1 = int(b1)
        self.b2 = int(b2)
        self._check()


    @property
    def shape(self) -> Tuple[int, int]:
        return self.n1, self.n2


    @property
    def blocks(self) -> Tuple[int, int]:
        return self.b1, self.b2


    def with_blocks(self, b1: int, b2: int) -> 'Dimensions':
        return Dimensions(self.n1, self.n2, b1, b2)


    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dimensions):
            return NotImplemented
        return (self.n1, self.n2, self.b1, self.b2) == (other.n1, other.n2, other.b1, other.b2)


    def __repr__(self) -> str:
        return f'Dimensions(n1={self.n1}, n2={self.n2}, b1={self.b1}, b2={self.b2})'


    def _check(self) -> None:
        if self.n1 < 1 or self.n2 < 1:
            raise DimensionError(f"node counts must be >= 1, got ({self.n1}, {self.n2})")
        if self.b1 < 1 or self.b2 < 1:
            raise DimensionError(f"block counts must be >= 1, got ({self.b1}, {self.b2})")
        if self.b1 > self.n1 or self.b2 > self.n2:
            raise DimensionError(
                f"more blocks than nodes: blocks ({self.b1}, {self.b2}) for nodes ({self.n1}, {self.n2})"
            )


class ZScoreMatrix:

    def __init__(self, values: Union[np.ndarray, Sequence]) -> None:
        values = np.array(values, dtype=np.float64)
        if values.ndim != 2:
            raise DimensionError(f"z-score matrix must be 2-d, got {values.ndim}-d")
        bad = np.argwhere(~np.isfinite(values))
        if len(bad) > 0:
            i, j = bad[0]
            raise InputError(f"non-finite z-score {values[i, j]} at (row={i}, col={j})")
        self.values = values


    @property
    def dims(self) -> Tuple[int, int]:
        return self.values.shape


    def __repr__(self) -> str:
        return f'ZScoreMatrix(dims={self.dims})'


class NullParams:
    d0 = 1

    def __init__(self, sigma0_sq: float=1.) -> None:
        if not sigma0_sq > 0.:
            raise ValueError(f"'sigma0_sq' must be positive, got {sigma0_sq}")
        self.sigma0_sq = float(sigma0_sq)


    def __repr__(self) -> str:
        return f'NullParams(sigma0_sq={self.sigma0_sq:.6g})'


class AltParams:
    d1 = 2

    def __init__(
            self, mu: np.ndarray, sigma_sq: np.ndarray, frozen: Optional[np.ndarray]=None
        ) -> None:

        self.mu = np.atleast_2d(np.array(mu, dtype=np.float64))
        self.sigma_sq = np.atleast_2d(np.array(sigma_sq, dtype=np.float64))
        if self.mu.shape != self.sigma_sq.shape:
            raise DimensionError(f"mu {self.mu.shape} and sigma_sq {self.sigma_sq.shape} differ")
        if not np.all(self.sigma_sq > 0.):
            raise ValueError("every 'sigma_sq' entry must be positive")
        if frozen is None:
            frozen = np.zeros(self.mu.shape, dtype=bool)
        self.frozen = np.asarray(frozen, dtype=bool)


    @property
    def blocks(self) -> Tuple[int, int]:
        return self.mu.shape


    def __repr__(self) -> str:
        return f'AltParams(mu={self.mu.tolist()}, sigma_sq={self.sigma_sq.tolist()})'


class ModelParams:

    def __init__(
            self, alpha1: Sequence[float], alpha2: Sequence[float], pi: np.ndarray,
            null_params: NullParams, alt_params: AltParams
        ) -> None:

        self.alpha1 = np.array(alpha1, dtype=np.float64).ravel()
        self.alpha2 = np.array(alpha2, dtype=np.float64).ravel()
        self.pi = np.atleast_2d(np.array(pi, dtype=np.float64))
        self.null_params = null_params
        self.alt_params = alt_params
        self._check()


    @property
    def blocks(self) -> Tuple[int, int]:
        return len(self.alpha1), len(self.alpha2)


    @property
    def clamped_pi(self) -> np.ndarray:
        return np.clip(self.pi, PI_CLAMP, 1. - PI_CLAMP)


    def n_free_params(self) -> int:
        b1, b2 = self.blocks
        return (b1 - 1) + (b2 - 1) + NullParams.d0 + (1 + AltParams.d1) * b1 * b2


    def permute(self, row_order: Sequence[int], col_order: Sequence[int]) -> 'ModelParams':
        row_order = np.asarray(row_order)
        col_order = np.asarray(col_order)
        grid = np.ix_(row_order, col_order)
        alt = AltParams(
            self.alt_params.mu[grid], self.alt_params.sigma_sq[grid], self.alt_params.frozen[grid]
        )
        return ModelParams(
            self.alpha1[row_order], self.alpha2[col_order], self.pi[grid],
            NullParams(self.null_params.sigma0_sq), alt
        )


    def to_dict(self) -> dict:
        return {
            'alpha1': self.alpha1.tolist(),
            'alpha2': self.alpha2.tolist(),
            'pi': self.pi.tolist(),
            'sigma0_sq': self.null_params.sigma0_sq,
            'mu': self.alt_params.mu.tolist(),
            'sigma_sq': self.alt_params.sigma_sq.tolist(),
        }


    @classmethod
    def from_dict(cls, d: dict) -> 'ModelParams':
        return cls(
            d['alpha1'], d['alpha2'], d['pi'],
            NullParams(d.get('sigma0_sq', 1.)),
            AltParams(d['mu'], d['sigma_sq']),
        )


    def __repr__(self) -> str:
        return (
            f'ModelParams(alpha1={self.alpha1.tolist()}, alpha2={self.alpha2.tolist()}, '
            f'pi={self.pi.tolist()}, {self.null_params}, {self.alt_params})'
        )


    def _check(self) -> None:
        for name, alpha in (('alpha1', self.alpha1), ('alpha2', self.alpha2)):
            if np.any(alpha < 0.) or abs(alpha.sum() - 1.) > 1e-12:
                raise ValueError(f"'{name}' must lie on the simplex, got {alpha.tolist()}")
        if self.pi.shape != self.blocks:
            raise DimensionError(f"'pi' has shape {self.pi.shape}, expected {self.blocks}")
        if np.any(self.pi < 0.) or np.any(self.pi > 1.):
            raise ValueError("every 'pi' entry must be in [0, 1]")
        if self.alt_params.blocks != self.blocks:
            raise DimensionError(
                f"alternative parameters have shape {self.alt_params.blocks}, expected {self.blocks}"
            )


class MembershipVector:
    """Block labels of one node side, stored 1-based."""

    def __init__(self, side: Side, labels: Sequence[int], n_blocks: Optional[int]=None) -> None:
        self.side = Side(side)
        self.labels = np.array(labels, dtype=np.int64).ravel()
        if n_blocks is None:
            n_blocks = int(self.labels.max()) if len(self.labels) > 0 else 1
        self.n_blocks = int(n_blocks)
        if len(self.labels) > 0 and (self.labels.min() < 1 or self.labels.max() > self.n_blocks):
            raise ValueError(f"labels must be in [1, {self.n_blocks}]")


    @property
    def index(self) -> np.ndarray:
        return self.labels - 1


    def __len__(self) -> int:
        return len(self.labels)


    @classmethod
    def from_index(cls, side: Side, index: Sequence[int], n_blocks: int) -> 'MembershipVector':
        return cls(side, np.asarray(index) + 1, n_blocks)


    def one_hot(self) -> np.ndarray:
        out = np.zeros((len(self.labels), self.n_blocks))
        out[np.arange(len(self.labels)), self.index] = 1.
        return out


class AdjacencyMatrix:

    def __init__(self, values: Union[np.ndarray, Sequence]) -> None:
        values = np.asarray(values)
        if values.ndim != 2:
            raise DimensionError(f"adjacency matrix must be 2-d, got {values.ndim}-d")
        if not np.all((values == 0) | (values == 1)):
            raise ValueError("adjacency entries must be 0 or 1")
        self.values = values.astype(np.int8)


    @property
    def dims(self) -> Tuple[int, int]:
        return self.values.shape


    @property
    def n_edges(self) -> int:
        return int(self.values.sum())


    def row_degrees(self) -> np.ndarray:
        return self.values.sum(axis=1).astype(np.int64)


    def col_degrees(self) -> np.ndarray:
        return self.values.sum(axis=0).astype(np.int64)


def to_values(x: Union[ZScoreMatrix, AdjacencyMatrix, np.ndarray]) -> np.ndarray:
    return np.asarray(getattr(x, 'values', x), dtype=np.float64)
