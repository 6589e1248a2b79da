"""CSV / JSON file formats.

Matrices of kind ``z`` and ``adjacency`` are bare comma-separated grids without
header or index. ``abundance`` tables carry a header row of feature names and
a first column of sample IDs. Floats are written in their shortest round-trip
decimal form, adjacency entries as 0/1 integers.
"""
from typing import Any, List, Sequence, Tuple

import os
import json

import numpy as np
import pandas as pd

from ..exceptions import MatrixParseError, MatrixValidationError
from ..model import MembershipVector


MATRIX_KINDS = ('z', 'adjacency', 'abundance', 'decisions')


def read_matrix(path: str, kind: str) -> np.ndarray:
    if kind == 'abundance':
        return read_table(path)[0]
    _check_kind(kind)
    cells = pd.read_csv(path, header=None, dtype=str, keep_default_na=False, skip_blank_lines=True)
    values = _parse_cells(path, cells.values)
    _validate(path, values, kind)
    return values.astype(np.int8) if kind in ('adjacency', 'decisions') else values


def read_table(path: str) -> Tuple[np.ndarray, List[str], List[str]]:
    """Abundance table -> (values, sample IDs, feature names)."""
    frame = pd.read_csv(path, header=0, index_col=0, dtype=str, keep_default_na=False)
    values = _parse_cells(path, frame.values)
    _validate(path, values, 'abundance')
    return values, [str(s) for s in frame.index], [str(c) for c in frame.columns]


def write_matrix(path: str, values: np.ndarray, kind: str='z') -> None:
    _check_kind(kind)
    values = np.asarray(values)
    if kind in ('adjacency', 'decisions'):
        cells = values.astype(np.int64)
    else:
        cells = [[repr(float(v)) for v in row] for row in np.atleast_2d(values)]
    pd.DataFrame(cells).to_csv(path, header=False, index=False, lineterminator='\n')


def write_table(path: str, values: np.ndarray, sample_ids: Sequence[str], names: Sequence[str]) -> None:
    cells = [[repr(float(v)) for v in row] for row in values]
    frame = pd.DataFrame(cells, index=list(sample_ids), columns=list(names))
    frame.index.name = 'sample'
    frame.to_csv(path, lineterminator='\n')


def read_labels(path: str) -> pd.Series:
    """Two-column CSV (sample, group) with header."""
    frame = pd.read_csv(path, header=0, dtype=str, keep_default_na=False)
    if frame.shape[1] != 2:
        raise MatrixValidationError(f"{path}: expected 2 columns (sample, group), got {frame.shape[1]}")
    return pd.Series(frame.iloc[:, 1].values, index=frame.iloc[:, 0].values)


def write_memberships(path: str, z: MembershipVector) -> None:
    pd.DataFrame({'block': z.labels}).to_csv(path, index=False, lineterminator='\n')


def write_json(path: str, obj: Any) -> None:
    with open(path, 'w') as f:
        json.dump(obj, f, indent=2, sort_keys=True, default=_json_default)
        f.write('\n')


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _parse_cells(path: str, cells: np.ndarray) -> np.ndarray:
    values = np.empty(cells.shape, dtype=np.float64)
    for (i, j), cell in np.ndenumerate(cells):
        try:
            values[i, j] = float(cell)
        except (TypeError, ValueError):
            raise MatrixParseError(path, i, j, cell) from None
    return values


def _validate(path: str, values: np.ndarray, kind: str) -> None:
    if values.size == 0:
        raise MatrixValidationError(f"{path}: empty matrix")
    if kind in ('adjacency', 'decisions'):
        bad = np.argwhere((values != 0.) & (values != 1.))
        rule = 'must be 0 or 1'
    elif kind == 'abundance':
        bad = np.argwhere(~np.isfinite(values) | (values < 0.))
        rule = 'must be finite and nonnegative'
    else:
        bad = np.argwhere(~np.isfinite(values))
        rule = 'must be finite'
    if len(bad) > 0:
        i, j = bad[0]
        raise MatrixValidationError(f"{path}: entry {values[i, j]} at (row={i}, col={j}) {rule}")


def _check_kind(kind: str) -> None:
    if kind not in MATRIX_KINDS:
        raise ValueError(f"'kind' must be one of {MATRIX_KINDS}, got '{kind}'")


def _json_default(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")
