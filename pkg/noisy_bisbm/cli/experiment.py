"""Replicated simulation study: every method, every nominal level, one row per replicate."""
from typing import Dict, List, Optional, Tuple

import time
import logging

import numpy as np
import pandas as pd

from ..exceptions import ConfigError
from ..model import Dimensions
from ..simulator import Scenario, make
from ..inference import FitOptions, fit
from ..selection import SelectionGrid, select_model
from ..multitest import (
    l_values, running_mean_threshold, p_from_z, bh, storey, lfdr_values, evaluate,
)
from ..parallel import parallel_map
from .config import RunConfig, EXPERIMENT_METHODS


logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ['method', 'alpha', 'mean_fdp', 'mean_tdp', 'replicates', 'wall_time_s']
ROC_COLUMNS = ['method', 'alpha', 'fdr', 'tdr']
SELECTION_COLUMNS = ['replicate', 'b1', 'b2', 'icl']


class ExperimentSummary:

    def __init__(self, rows: pd.DataFrame, selections: pd.DataFrame) -> None:
        self.rows = rows
        self.selections = selections


    @property
    def summary(self) -> pd.DataFrame:
        grouped = self.rows.groupby(['method', 'alpha'], sort=True)
        out = grouped.agg(
            mean_fdp=('fdp', 'mean'), mean_tdp=('tdp', 'mean'),
            replicates=('replicate', 'nunique'), wall_time_s=('wall_time_s', 'mean'),
        ).reset_index()
        return out[SUMMARY_COLUMNS]


    @property
    def roc(self) -> pd.DataFrame:
        return self.summary.rename(columns={'mean_fdp': 'fdr', 'mean_tdp': 'tdr'})[ROC_COLUMNS]


class ReplicateSettings:

    def __init__(
            self, scenario: str, seed: int, alphas: List[float], methods: List[str],
            known_blocks: bool, overrides: Dict[str, object], grid: SelectionGrid,
            opts: FitOptions, lambda_tune: float
        ) -> None:

        self.scenario = scenario
        self.seed = seed
        self.alphas = alphas
        self.methods = methods
        self.known_blocks = known_blocks
        self.overrides = overrides
        self.grid = grid
        self.opts = opts
        self.lambda_tune = lambda_tune


    @classmethod
    def from_config(cls, config: RunConfig, scenario: str) -> 'ReplicateSettings':
        unknown = sorted(set(config.methods) - set(EXPERIMENT_METHODS))
        if unknown:
            raise ConfigError(f"unknown methods {unknown}, available: {list(EXPERIMENT_METHODS)}")
        for alpha in config.alphas:
            if not 0. < alpha <= 1.:
                raise ConfigError(f"alpha must be in range (0., 1.], got {alpha}")
        if config.reps < 1:
            raise ConfigError(f"'reps' must be >= 1, got {config.reps}")

        return cls(
            scenario, config.seed, sorted(config.alphas), list(config.methods), config.known_blocks,
            {'n1': config.n1, 'n2': config.n2, 'mu': config.mu},
            config.selection_grid(), config.fit_options(), config.lambda_tune,
        )


def run_experiment(
        config: RunConfig, scenario: str, processes: Optional[int]=None
    ) -> ExperimentSummary:

    settings = ReplicateSettings.from_config(config, scenario)
    # fail on bad overrides before spawning workers
    _make_scenario(settings, settings.seed)

    logger.info(
        "experiment %s: %d replicates, methods=%s, alphas=%s",
        scenario, config.reps, settings.methods, settings.alphas,
    )
    results = parallel_map(
        lambda r: run_replicate(settings, r), range(config.reps), processes
    )

    rows = pd.DataFrame(
        [row for replicate_rows, _ in results for row in replicate_rows],
        columns=['replicate', 'method', 'alpha', 'fdp', 'tdp', 'n_rejected', 'wall_time_s'],
    ).sort_values(['replicate', 'method', 'alpha'], kind='stable').reset_index(drop=True)

    selections = pd.DataFrame(
        [selection for _, selection in results if selection is not None], columns=SELECTION_COLUMNS
    ).sort_values('replicate', kind='stable').reset_index(drop=True)

    return ExperimentSummary(rows, selections)


def run_replicate(settings: ReplicateSettings, replicate: int) -> Tuple[List[dict], Optional[dict]]:
    seed = settings.seed + replicate
    scenario = _make_scenario(settings, seed)
    x = scenario.x.values
    truth = scenario.truth.a

    rows = []
    selection = None
    for method in settings.methods:
        start = time.perf_counter()
        if method == 'bisbm':
            decide_at, selection = _bisbm(settings, scenario, replicate)
        elif method == 'bh':
            p = p_from_z(x)
            decide_at = lambda alpha: bh(p, alpha)
        elif method == 'storey':
            p = p_from_z(x)
            decide_at = lambda alpha: storey(p, alpha, settings.lambda_tune)
        else:
            lfdr = lfdr_values(x, settings.lambda_tune)
            decide_at = lambda alpha: _threshold(lfdr, alpha)

        decisions = {alpha: decide_at(alpha) for alpha in settings.alphas}
        elapsed = time.perf_counter() - start
        for alpha, phi in decisions.items():
            metrics = evaluate(phi, truth)
            rows.append(dict(
                replicate=replicate, method=method, alpha=alpha, fdp=metrics.fdp,
                tdp=metrics.tdp, n_rejected=metrics.n_rejected, wall_time_s=elapsed,
            ))

    logger.debug("replicate %d done (seed %d)", replicate, seed)
    return rows, selection


def _bisbm(settings: ReplicateSettings, scenario: Scenario, replicate: int):
    x = scenario.x.values
    if settings.known_blocks:
        if scenario.params is None:
            raise ConfigError(f"scenario '{scenario.id}' has no block structure; drop 'known_blocks'")
        b1, b2 = scenario.params.blocks
        result = fit(x, Dimensions(x.shape[0], x.shape[1], b1, b2), settings.opts)
        icl = float('nan')
    else:
        best, _ = select_model(x, settings.grid, settings.opts, processes=1)
        result, icl = best.fit, best.icl

    l = l_values(x, result.z1_hat, result.z2_hat, result.params)
    selection = dict(replicate=replicate, b1=result.dims.b1, b2=result.dims.b2, icl=icl)
    return (lambda alpha: _threshold(l.values, alpha)), selection


def _threshold(values: np.ndarray, alpha: float) -> np.ndarray:
    tau, _ = running_mean_threshold(values, alpha)
    return (values <= tau).astype(np.int8)


def _make_scenario(settings: ReplicateSettings, seed: int) -> Scenario:
    try:
        return make(settings.scenario, seed, **settings.overrides)
    except ValueError as e:
        raise ConfigError(str(e)) from e
