from typing import Any, Callable, Dict, List, Optional, Tuple

import os
import json
import logging
import platform

import numpy as np

from ..exceptions import ConfigError, MissingSettingError
from ..simulator import RNG_NAME, RNG_VERSION
from ..inference import FitOptions
from ..selection import SelectionGrid
from .io import write_json


logger = logging.getLogger(__name__)

MANIFEST_NAME = 'run-manifest.json'
DEFAULT_ALPHAS = (0.005, 0.025, 0.05, 0.1, 0.15, 0.25)
EXPERIMENT_METHODS = ('bisbm', 'bh', 'storey', 'sc')


def _float_list(value: Any) -> List[float]:
    if isinstance(value, str):
        value = [v for v in value.split(',') if v.strip()]
    return [float(v) for v in value]


def _str_list(value: Any) -> List[str]:
    if isinstance(value, str):
        value = [v.strip() for v in value.split(',') if v.strip()]
    return [str(v) for v in value]


def _block_range(value: Any) -> Tuple[int, int]:
    if isinstance(value, (list, tuple)):
        lo, hi = value
        return int(lo), int(hi)
    return SelectionGrid.parse_range(value)


def _bool(value: Any) -> bool:
    if isinstance(value, str):
        if value.lower() in ('1', 'true', 'yes'):
            return True
        if value.lower() in ('0', 'false', 'no'):
            return False
        raise ValueError(f"not a boolean: '{value}'")
    return bool(value)


Field = Tuple[Callable[[Any], Any], Any]

_FIT_FIELDS: Dict[str, Field] = {
    'seed': (int, 0),
    'restarts': (int, 5),
    'max_iters': (int, 200),
    'inner_iters': (int, 5),
    'tol': (float, 1e-6),
    'deterministic': (_bool, True),
}

_GRID_FIELDS: Dict[str, Field] = {
    'b1_range': (_block_range, (1, 5)),
    'b2_range': (_block_range, (1, 5)),
}

SCHEMAS: Dict[str, Dict[str, Field]] = {
    'simulate': {
        'scenario': (str, 'scenario-a'),
        'seed': (int, 0),
        'n1': (int, None),
        'n2': (int, None),
        'mu': (float, None),
        'out': (str, None),
    },
    'zscore': {
        'y1': (str, None),
        'y2': (str, None),
        'y1_group2': (str, None),
        'y2_group2': (str, None),
        'group_labels': (str, None),
        'groups': (_str_list, None),
        'mclr': (_bool, False),
        'variance': (str, 'literal'),
        'out': (str, None),
    },
    'fit': {
        'z': (str, None),
        'b1': (int, None),
        'b2': (int, None),
        **_FIT_FIELDS,
        'out': (str, None),
    },
    'select': {
        'z': (str, None),
        **_GRID_FIELDS,
        **_FIT_FIELDS,
        'out': (str, None),
    },
    'test': {
        'z': (str, None),
        'b1': (int, None),
        'b2': (int, None),
        'alpha': (float, 0.05),
        **_GRID_FIELDS,
        **_FIT_FIELDS,
        'out': (str, None),
    },
    'evaluate': {
        'decisions': (str, None),
        'truth': (str, None),
        'out': (str, None),
    },
    'experiment': {
        'scenario': (str, 'scenario-a'),
        'reps': (int, 50),
        'alphas': (_float_list, list(DEFAULT_ALPHAS)),
        'methods': (_str_list, list(EXPERIMENT_METHODS)),
        'known_blocks': (_bool, False),
        'n1': (int, None),
        'n2': (int, None),
        'mu': (float, None),
        'lambda_tune': (float, 0.5),
        **_GRID_FIELDS,
        **_FIT_FIELDS,
        'out': (str, None),
    },
}

REQUIRED: Dict[str, Tuple[str, ...]] = {
    'simulate': ('out',),
    'zscore': ('y1', 'y2', 'out'),
    'fit': ('z', 'b1', 'b2', 'out'),
    'select': ('z', 'out'),
    'test': ('z', 'out'),
    'evaluate': ('decisions', 'truth'),
    'experiment': ('out',),
}


class RunConfig:
    """Resolved parameters of one subcommand: schema defaults < JSON document < flags."""

    def __init__(self, command: str, values: Dict[str, Any]) -> None:
        self.command = command
        self.values = values


    def __getattr__(self, name: str) -> Any:
        try:
            return self.__dict__['values'][name]
        except KeyError:
            raise AttributeError(name) from None


    def fit_options(self) -> FitOptions:
        try:
            return FitOptions(
                max_outer_iters=self.max_iters, inner_iters=self.inner_iters,
                elbo_rel_tol=self.tol, n_restarts=self.restarts, seed=self.seed,
                deterministic_reduction=self.deterministic,
            )
        except ValueError as e:
            raise ConfigError(str(e)) from e


    def selection_grid(self) -> SelectionGrid:
        try:
            return SelectionGrid(self.b1_range, self.b2_range)
        except ValueError as e:
            raise ConfigError(str(e)) from e


    def to_dict(self) -> dict:
        return dict(self.values)


    @classmethod
    def load(
            cls, command: str, config_path: Optional[str]=None,
            overrides: Optional[Dict[str, Any]]=None
        ) -> 'RunConfig':

        if command not in SCHEMAS:
            raise ConfigError(f"unknown command '{command}'")
        schema = SCHEMAS[command]

        document = {}
        if config_path is not None:
            try:
                with open(config_path) as f:
                    document = json.load(f)
            except (OSError, json.JSONDecodeError) as e:
                raise ConfigError(f"cannot read config '{config_path}': {e}") from e
            if not isinstance(document, dict):
                raise ConfigError(f"config '{config_path}' must hold a JSON object")

        unknown = sorted(set(document) - set(schema))
        if unknown:
            raise ConfigError(f"unknown keys for '{command}': {unknown}")

        values = {key: default for key, (_, default) in schema.items()}
        values.update(document)
        values.update({k: v for k, v in (overrides or {}).items() if k in schema and v is not None})

        for key, (convert, _) in schema.items():
            if values[key] is None:
                continue
            try:
                values[key] = convert(values[key])
            except (TypeError, ValueError) as e:
                raise ConfigError(f"invalid value for '{key}': {values[key]!r} ({e})") from e

        missing = [key for key in REQUIRED[command] if values[key] is None]
        if missing:
            raise MissingSettingError(f"missing required settings for '{command}': {missing}")

        return cls(command, values)


def manifest(config: RunConfig, **extra: Any) -> dict:
    from .. import __version__
    return {
        'command': config.command,
        'config': config.to_dict(),
        'seed': config.values.get('seed'),
        'version': __version__,
        'rng': {'name': RNG_NAME, 'version': RNG_VERSION},
        'numpy': np.__version__,
        'python': platform.python_version(),
        **extra,
    }


def write_manifest(out_dir: str, config: RunConfig, **extra: Any) -> str:
    path = os.path.join(out_dir, MANIFEST_NAME)
    write_json(path, manifest(config, **extra))
    logger.debug("wrote %s", path)
    return path
