from typing import Callable, Dict, List, Optional

import os
import sys
import json
import logging
import argparse

import numpy as np
import pandas as pd

from ..exceptions import BisbmError, FitError, ConfigError, InputError, MissingSettingError
from ..model import Dimensions, ZScoreMatrix, AdjacencyMatrix
from ..simulator import registered, make
from ..inference import FitResult, fit
from ..selection import select_model, records_to_frame
from ..multitest import l_values, report, evaluate
from ..stats import PairedData, pearson_z, two_sample_stats, mclr
from . import io
from .config import RunConfig, write_manifest
from .experiment import run_experiment


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):

    def error(self, message: str) -> None:
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='noisy-bisbm', description="Bipartite noisy stochastic block model toolkit")
    parser.add_argument('-v', '--verbose', action='count', default=0, help="repeat for more detail")
    commands = parser.add_subparsers(dest='command', required=True)

    p = _command(commands, 'simulate', "sample a scenario: truth and observations")
    p.add_argument('--scenario', help=f"one of {registered()} (or a/b/c)")
    p.add_argument('--seed', type=int)
    p.add_argument('--n1', type=int)
    p.add_argument('--n2', type=int)
    p.add_argument('--mu', type=float, help="alternative mean override")

    p = _command(commands, 'zscore', "paired abundance tables -> z-score matrix")
    p.add_argument('--y1', help="microbe table (samples x features)")
    p.add_argument('--y2', help="metabolite table (samples x features)")
    p.add_argument('--y1-group2', dest='y1_group2')
    p.add_argument('--y2-group2', dest='y2_group2')
    p.add_argument('--group-labels', dest='group_labels', help="CSV (sample, group) splitting one table pair")
    p.add_argument('--groups', help="two comma-separated group names compared by --group-labels")
    p.add_argument('--mclr', action='store_const', const=True, help="mCLR-transform the y1 counts first")
    p.add_argument('--variance', choices=['literal', 'cai_liu'])

    p = _command(commands, 'fit', "variational EM at fixed block counts")
    p.add_argument('--z')
    p.add_argument('--b1', type=int)
    p.add_argument('--b2', type=int)
    _fit_arguments(p)

    p = _command(commands, 'select', "ICL grid search over block counts")
    p.add_argument('--z')
    _grid_arguments(p)
    _fit_arguments(p)

    p = _command(commands, 'test', "structured l-value testing at level alpha")
    p.add_argument('--z')
    p.add_argument('--b1', type=int)
    p.add_argument('--b2', type=int)
    p.add_argument('--alpha', type=float)
    _grid_arguments(p)
    _fit_arguments(p)

    p = _command(commands, 'evaluate', "false / true discovery proportions against a truth")
    p.add_argument('--decisions')
    p.add_argument('--truth')

    p = _command(commands, 'experiment', "replicated simulation study")
    p.add_argument('--scenario')
    p.add_argument('--reps', type=int)
    p.add_argument('--alphas', help="comma-separated nominal levels")
    p.add_argument('--methods', help="comma-separated subset of bisbm,bh,storey,sc")
    p.add_argument('--known-blocks', dest='known_blocks', action='store_const', const=True)
    p.add_argument('--n1', type=int)
    p.add_argument('--n2', type=int)
    p.add_argument('--mu', type=float)
    p.add_argument('--lambda', dest='lambda_tune', type=float, help="Storey tuning parameter")
    _grid_arguments(p)
    _fit_arguments(p)

    return parser


def _command(commands, name: str, help: str) -> argparse.ArgumentParser:
    p = commands.add_parser(name, help=help)
    p.add_argument('--config', help="JSON document with settings; flags win")
    p.add_argument('--out', help="output directory" if name != 'evaluate' else "optional output directory")
    return p


def _fit_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument('--seed', type=int)
    p.add_argument('--restarts', type=int)
    p.add_argument('--max-iters', dest='max_iters', type=int)
    p.add_argument('--inner-iters', dest='inner_iters', type=int)
    p.add_argument('--tol', type=float, help="relative ELBO tolerance")
    p.add_argument(
        '--fast-reduction', dest='deterministic', action='store_const', const=False,
        help="allow optimised, non-bit-reproducible tensor sums",
    )


def _grid_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument('--b1-range', dest='b1_range', help="lo:hi, default 1:5")
    p.add_argument('--b2-range', dest='b2_range', help="lo:hi, default 1:5")


def run(argv: Optional[List[str]]=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        configure_logging(args.verbose)
        config = RunConfig.load(args.command, args.config, vars(args))
        COMMANDS[args.command](config)
    except SystemExit as e:
        return int(e.code or 0)
    except (UsageError, MissingSettingError) as e:
        _report(e, 'usage')
        return EXIT_USAGE
    except (FitError, FloatingPointError) as e:
        _report(e)
        return EXIT_NUMERICAL
    except (BisbmError, ValueError, OSError) as e:
        _report(e)
        return EXIT_DATA
    return EXIT_OK


def main() -> None:
    sys.exit(run())


class JsonLineFormatter(logging.Formatter):

    def format(self, record: logging.LogRecord) -> str:
        return json.dumps({
            'level': record.levelname.lower(), 'logger': record.name, 'message': record.getMessage(),
        })


def configure_logging(verbosity: int) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonLineFormatter())
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, handlers=[handler], force=True)


def _report(error: BaseException, kind: Optional[str]=None) -> None:
    record = {'level': 'error', 'kind': kind or type(error).__name__, 'message': str(error)}
    sys.stderr.write(json.dumps(record) + '\n')


def cmd_simulate(config: RunConfig) -> None:
    scenario_id = _scenario_id(config.scenario)
    try:
        scenario = make(scenario_id, config.seed, n1=config.n1, n2=config.n2, mu=config.mu)
    except ValueError as e:
        raise ConfigError(str(e)) from e

    out = io.ensure_dir(config.out)
    io.write_matrix(os.path.join(out, 'x.csv'), scenario.x.values, 'z')
    io.write_matrix(os.path.join(out, 'adjacency.csv'), scenario.truth.a.values, 'adjacency')
    if scenario.truth.has_memberships:
        io.write_memberships(os.path.join(out, 'z1.csv'), scenario.truth.z1)
        io.write_memberships(os.path.join(out, 'z2.csv'), scenario.truth.z2)
    if scenario.params is not None:
        io.write_json(os.path.join(out, 'params.json'), scenario.params.to_dict())
    write_manifest(out, config, scenario=scenario_id)
    logger.info("simulated %s with seed %d into %s", scenario_id, config.seed, out)


def cmd_zscore(config: RunConfig) -> None:
    first = _read_paired(config.y1, config.y2, config.mclr)
    out = io.ensure_dir(config.out)

    if config.y1_group2 is not None or config.y2_group2 is not None:
        if config.y1_group2 is None or config.y2_group2 is None:
            raise UsageError("two-sample mode needs both --y1-group2 and --y2-group2")
        second = _read_paired(config.y1_group2, config.y2_group2, config.mclr)
        z, degenerate = two_sample_stats(first, second, config.variance)
    elif config.group_labels is not None:
        group1, group2 = _split_by_labels(first, config.group_labels, config.groups)
        z, degenerate = two_sample_stats(group1, group2, config.variance)
    else:
        z, stats = pearson_z(first, config.variance)
        degenerate = stats.degenerate
        io.write_matrix(os.path.join(out, 'rho.csv'), stats.rho_hat, 'z')

    io.write_matrix(os.path.join(out, 'z.csv'), z.values, 'z')
    io.write_matrix(os.path.join(out, 'degenerate.csv'), degenerate, 'decisions')
    io.write_json(os.path.join(out, 'features.json'), {'rows': first.names1, 'cols': first.names2})
    write_manifest(out, config, n_degenerate=int(degenerate.sum()))


def cmd_fit(config: RunConfig) -> None:
    x = _read_z(config.z)
    result = fit(x, Dimensions(x.dims[0], x.dims[1], config.b1, config.b2), config.fit_options())
    out = io.ensure_dir(config.out)
    write_fit(out, result)
    write_manifest(out, config, elbo=result.elbo, converged=result.converged)


def cmd_select(config: RunConfig) -> None:
    x = _read_z(config.z)
    best, records = select_model(x, config.selection_grid(), config.fit_options())
    out = io.ensure_dir(config.out)
    records_to_frame(records).to_csv(os.path.join(out, 'icl.csv'), index=False, lineterminator='\n')
    write_fit(out, best.fit)
    write_manifest(out, config, selected=[best.b1, best.b2], icl=best.icl)


def cmd_test(config: RunConfig) -> None:
    x = _read_z(config.z)
    if (config.b1 is None) != (config.b2 is None):
        raise UsageError("give both --b1 and --b2, or neither to select them by ICL")
    if config.b1 is None:
        best, _ = select_model(x, config.selection_grid(), config.fit_options())
        result = best.fit
    else:
        result = fit(x, Dimensions(x.dims[0], x.dims[1], config.b1, config.b2), config.fit_options())

    l = l_values(x, result.z1_hat, result.z2_hat, result.params)
    decision = report(l, config.alpha)

    out = io.ensure_dir(config.out)
    write_fit(out, result)
    io.write_matrix(os.path.join(out, 'lvalues.csv'), l.values, 'z')
    io.write_matrix(os.path.join(out, 'decisions.csv'), decision.decisions, 'decisions')
    io.write_json(os.path.join(out, 'report.json'), {
        'alpha': decision.alpha, 'tau': decision.tau, 'est_mfdr': decision.est_mfdr,
        'n_rejected': decision.n_rejected,
    })
    write_manifest(out, config, tau=decision.tau, n_rejected=decision.n_rejected)
    logger.info("%s", decision)


def cmd_evaluate(config: RunConfig) -> None:
    decisions = io.read_matrix(config.decisions, 'decisions')
    truth = AdjacencyMatrix(io.read_matrix(config.truth, 'adjacency'))
    metrics = evaluate(decisions, truth)
    sys.stdout.write(json.dumps(metrics.to_dict()) + '\n')
    if config.out is not None:
        out = io.ensure_dir(config.out)
        io.write_json(os.path.join(out, 'metrics.json'), metrics.to_dict())
        write_manifest(out, config)


def cmd_experiment(config: RunConfig) -> None:
    scenario_id = _scenario_id(config.scenario)
    result = run_experiment(config, scenario_id)
    out = io.ensure_dir(config.out)
    result.summary.to_csv(os.path.join(out, 'summary.csv'), index=False, lineterminator='\n')
    result.roc.to_csv(os.path.join(out, 'roc.csv'), index=False, lineterminator='\n')
    result.selections.to_csv(os.path.join(out, 'selections.csv'), index=False, lineterminator='\n')
    write_manifest(out, config, scenario=scenario_id)


COMMANDS: Dict[str, Callable[[RunConfig], None]] = {
    'simulate': cmd_simulate,
    'zscore': cmd_zscore,
    'fit': cmd_fit,
    'select': cmd_select,
    'test': cmd_test,
    'evaluate': cmd_evaluate,
    'experiment': cmd_experiment,
}


def write_fit(out: str, result: FitResult) -> None:
    io.write_json(os.path.join(out, 'params.json'), result.params.to_dict())
    io.write_memberships(os.path.join(out, 'z1_hat.csv'), result.z1_hat)
    io.write_memberships(os.path.join(out, 'z2_hat.csv'), result.z2_hat)
    pd.DataFrame({'elbo': result.elbo_trace}).to_csv(
        os.path.join(out, 'elbo_trace.csv'), index=False, lineterminator='\n'
    )
    io.write_json(os.path.join(out, 'fit.json'), {
        'b1': result.dims.b1, 'b2': result.dims.b2, 'elbo': result.elbo,
        'converged': result.converged, 'n_iter': result.n_iter,
        'restart_index': result.restart_index, 'empty_block_events': result.empty_block_events,
        'all_restart_elbos': result.all_restart_elbos,
    })


def _scenario_id(name: str) -> str:
    if name in registered():
        return name
    if f'scenario-{name}' in registered():
        return f'scenario-{name}'
    raise UsageError(f"unknown scenario '{name}', available: {registered()}")


def _read_z(path: str) -> ZScoreMatrix:
    return ZScoreMatrix(io.read_matrix(path, 'z'))


def _read_paired(path1: str, path2: str, apply_mclr: bool) -> PairedData:
    y1, ids1, names1 = io.read_table(path1)
    y2, ids2, names2 = io.read_table(path2)
    if ids1 != ids2:
        raise InputError(f"sample IDs of '{path1}' and '{path2}' do not match row by row")
    if apply_mclr:
        y1 = mclr(y1)
    return PairedData(y1, y2, names1, names2, ids1)


def _split_by_labels(data: PairedData, labels_path: str, groups: Optional[List[str]]):
    labels = io.read_labels(labels_path)
    missing = [s for s in data.sample_ids if s not in labels.index]
    if missing:
        raise InputError(f"samples without a group label: {missing[:5]}")
    sample_groups = labels.loc[data.sample_ids].values
    if groups is None:
        groups = sorted(np.unique(sample_groups))
    if len(groups) != 2:
        raise UsageError(f"two groups are compared, got {groups}")
    return data.subset(sample_groups == groups[0]), data.subset(sample_groups == groups[1])
