from typing import List, Optional, Tuple, Union

import logging

import numpy as np
import pandas as pd

from ..exceptions import BisbmError, FitError
from ..model import Dimensions, NullParams, AltParams, ZScoreMatrix, to_values
from ..inference import FitOptions, FitResult, fit, expected_complete_loglik
from ..parallel import parallel_map


logger = logging.getLogger(__name__)


class SelectionRecord:

    def __init__(
            self, b1: int, b2: int, icl: float, elbo_complete: float, penalty: float,
            fit: Optional[FitResult]=None, error: Optional[str]=None
        ) -> None:

        self.b1 = b1
        self.b2 = b2
        self.icl = icl
        self.elbo_complete = elbo_complete
        self.penalty = penalty
        self.fit = fit
        self.error = error


    @property
    def failed(self) -> bool:
        return self.error is not None


    def sort_key(self) -> Tuple[float, int, int]:
        # larger is better: ICL first, then fewer total blocks, then fewer row blocks
        return (self.icl, -(self.b1 + self.b2), -self.b1)


    def __repr__(self) -> str:
        return f'SelectionRecord(b1={self.b1}, b2={self.b2}, icl={self.icl:.4f})'


class SelectionGrid:

    def __init__(self, b1_range: Tuple[int, int]=(1, 5), b2_range: Tuple[int, int]=(1, 5)) -> None:
        for name, (lo, hi) in (('b1_range', b1_range), ('b2_range', b2_range)):
            if lo < 1 or hi < lo:
                raise ValueError(f"'{name}' must satisfy 1 <= lo <= hi, got ({lo}, {hi})")
        self.b1_range = (int(b1_range[0]), int(b1_range[1]))
        self.b2_range = (int(b2_range[0]), int(b2_range[1]))


    def cells(self) -> List[Tuple[int, int]]:
        return [
            (b1, b2)
            for b1 in range(self.b1_range[0], self.b1_range[1] + 1)
            for b2 in range(self.b2_range[0], self.b2_range[1] + 1)
        ]


    @staticmethod
    def parse_range(text: str) -> Tuple[int, int]:
        """'3' -> (3, 3); '1:5' -> (1, 5)."""
        parts = [int(p) for p in str(text).split(':')]
        if len(parts) == 1:
            return parts[0], parts[0]
        if len(parts) == 2:
            return parts[0], parts[1]
        raise ValueError(f"invalid block range '{text}'")


def icl_penalty(
        dims: Dimensions, b1: int, b2: int, d0: int=NullParams.d0, d1: int=AltParams.d1
    ) -> float:

    n1, n2 = dims.n1, dims.n2
    return float(
        (b1 - 1) * np.log(n1) + (b2 - 1) * np.log(n2)
        + (d0 + (1 + d1) * b1 * b2) * np.log(n1 * n2)
    )


def icl_score(x: Union[ZScoreMatrix, np.ndarray], fit: FitResult) -> SelectionRecord:
    x = to_values(x)
    dims = fit.dims
    complete = expected_complete_loglik(x, fit.params, fit.state)
    penalty = icl_penalty(dims, dims.b1, dims.b2)
    return SelectionRecord(dims.b1, dims.b2, complete - penalty, complete, penalty, fit)


def select_model(
        x: Union[ZScoreMatrix, np.ndarray], grid: Optional[SelectionGrid]=None,
        opts: Optional[FitOptions]=None, processes: Optional[int]=None
    ) -> Tuple[SelectionRecord, List[SelectionRecord]]:

    x = x.values if isinstance(x, ZScoreMatrix) else ZScoreMatrix(x).values
    grid = grid or SelectionGrid()
    opts = opts or FitOptions()

    def fit_cell(cell: Tuple[int, int]) -> SelectionRecord:
        b1, b2 = cell
        try:
            dims = Dimensions(x.shape[0], x.shape[1], b1, b2)
            return icl_score(x, fit(x, dims, opts))
        except BisbmError as e:
            logger.warning("cell (%d, %d) failed: %s", b1, b2, e)
            return SelectionRecord(b1, b2, float('-inf'), float('nan'), float('nan'), error=str(e))

    records = parallel_map(fit_cell, grid.cells(), processes)
    valid = [r for r in records if not r.failed]
    if not valid:
        raise records_error(records)

    best = max(valid, key=SelectionRecord.sort_key)
    logger.info("ICL selects (B1, B2) = (%d, %d), icl=%.4f", best.b1, best.b2, best.icl)
    return best, records


def records_error(records: List[SelectionRecord]) -> FitError:
    detail = '; '.join(f'({r.b1}, {r.b2}): {r.error}' for r in records)
    return FitError(f"every grid cell failed: {detail}")


def records_to_frame(records: List[SelectionRecord]) -> pd.DataFrame:
    rows = []
    for r in sorted(records, key=lambda r: (r.b1, r.b2)):
        rows.append({
            'b1': r.b1,
            'b2': r.b2,
            'icl': r.icl,
            'elbo_complete': r.elbo_complete,
            'penalty': r.penalty,
            'elbo': r.fit.elbo if r.fit is not None else float('nan'),
            'converged': r.fit.converged if r.fit is not None else False,
            'error': r.error or '',
        })
    return pd.DataFrame(rows, columns=['b1', 'b2', 'icl', 'elbo_complete', 'penalty', 'elbo', 'converged', 'error'])
