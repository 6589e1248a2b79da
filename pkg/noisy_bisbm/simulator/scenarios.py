from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import importlib

import numpy as np

from ..model import Dimensions, NullParams, AltParams, ModelParams, ZScoreMatrix
from .graphs import (
    LatentTruth, PAConfig, sample_bisbm, sample_observations, observations_from_graph,
    nested_graph, preferential_attachment,
)
from .rng import derive_seed


GRAPH_STREAM = 0
OBSERVATION_STREAM = 1


class Scenario:

    def __init__(
            self, id: str, seed: int, truth: LatentTruth, x: ZScoreMatrix,
            params: Optional[ModelParams]=None
        ) -> None:

        self.id = id
        self.seed = seed
        self.truth = truth
        self.x = x
        self.params = params


EntryPoint = Union[str, Callable[..., Scenario]]


class ScenarioSpec:

    def __init__(self, id: str, entry_point: EntryPoint, kwargs: Dict[str, Any]) -> None:
        self.id = id
        self.entry_point = entry_point
        self.kwargs = kwargs


    def load(self) -> Callable[..., Scenario]:
        """Resolves a 'package.module:function' entry point."""
        if callable(self.entry_point):
            return self.entry_point
        module_name, attr = self.entry_point.split(':')
        return getattr(importlib.import_module(module_name), attr)


_registry: Dict[str, ScenarioSpec] = {}


def register(id: str, entry_point: EntryPoint, kwargs: Optional[Dict[str, Any]]=None) -> None:
    if id in _registry:
        raise ValueError(f"scenario '{id}' already registered")
    _registry[id] = ScenarioSpec(id, entry_point, dict(kwargs or {}))


def registered() -> List[str]:
    return sorted(_registry)


def make(id: str, seed: int, **overrides: Any) -> Scenario:
    if id not in _registry:
        raise KeyError(f"scenario '{id}' not found, available: {registered()}")
    spec = _registry[id]
    kwargs = dict(spec.kwargs)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    unknown = set(overrides) - set(kwargs)
    if unknown:
        raise ValueError(f"unknown overrides for scenario '{id}': {sorted(unknown)}")
    kwargs.update(overrides)
    scenario = spec.load()(seed=seed, **kwargs)
    scenario.id = id
    return scenario


def block_params(
        b1: int, b2: int, pi: np.ndarray, mu: np.ndarray, sigma_sq: float=1., sigma0_sq: float=1.
    ) -> ModelParams:

    return ModelParams(
        np.full(b1, 1. / b1), np.full(b2, 1. / b2), pi,
        NullParams(sigma0_sq), AltParams(mu, np.full((b1, b2), sigma_sq)),
    )


def diagonal_blocks(
        b1: int, b2: int, on: float, off: float, diag: Sequence[int]=None
    ) -> np.ndarray:
    """``on`` at (q, q) for q in ``diag`` (default: every q < min(b1, b2)), ``off`` elsewhere."""
    out = np.full((b1, b2), off, dtype=np.float64)
    for q in (range(min(b1, b2)) if diag is None else diag):
        out[q, q] = on
    return out


def block_model_scenario(
        seed: int, n1: int, n2: int, b1: int, b2: int, pi_on: float, pi_off: float,
        mu_on: float, mu_off: float, sigma_sq: float, sigma0_sq: float,
        diag: Optional[Sequence[int]]=None
    ) -> Scenario:

    params = block_params(
        b1, b2,
        diagonal_blocks(b1, b2, pi_on, pi_off, diag),
        diagonal_blocks(b1, b2, mu_on, mu_off, diag),
        sigma_sq, sigma0_sq,
    )
    dims = Dimensions(n1, n2, b1, b2)
    truth = sample_bisbm(dims, params, derive_seed(seed, GRAPH_STREAM))
    x = sample_observations(truth, params, derive_seed(seed, OBSERVATION_STREAM))
    return Scenario('', seed, truth, x, params)


def nested_scenario(
        seed: int, n1: int, n2: int, mu: float, sigma_sq: float, sigma0_sq: float
    ) -> Scenario:

    truth = LatentTruth(nested_graph(n1, n2))
    x = observations_from_graph(truth.a, mu, sigma_sq, sigma0_sq, derive_seed(seed, OBSERVATION_STREAM))
    return Scenario('', seed, truth, x)


def preferential_attachment_scenario(
        seed: int, n1: int, lam: float, degree_choices: Sequence[int], mu: float,
        sigma_sq: float, sigma0_sq: float
    ) -> Scenario:

    a = preferential_attachment(PAConfig(n1, lam, degree_choices), derive_seed(seed, GRAPH_STREAM))
    truth = LatentTruth(a)
    x = observations_from_graph(a, mu, sigma_sq, sigma0_sq, derive_seed(seed, OBSERVATION_STREAM))
    return Scenario('', seed, truth, x)


def comparison_scenario(
        seed: int, n1: int, n2: int, b1: int, b2: int, pi_on: float, pi_off: float,
        mu: float, sigma_sq: float, sigma0_sq: float
    ) -> Scenario:
    """Block model with one alternative N(mu, sigma_sq) shared by every block."""
    return block_model_scenario(
        seed, n1, n2, b1, b2, pi_on, pi_off, mu, mu, sigma_sq, sigma0_sq
    )
