from typing import List, Optional

import numpy as np

from ..model import Dimensions, ModelParams, MembershipVector


class VariationalState:

    def __init__(
            self, beta1: np.ndarray, beta2: np.ndarray, rho: np.ndarray,
            elbo: float=float('nan'), degenerate_init: bool=False
        ) -> None:

        self.beta1 = beta1
        self.beta2 = beta2
        self.rho = rho
        self.elbo = elbo
        self.degenerate_init = degenerate_init


    @property
    def dims(self) -> Dimensions:
        n1, b1 = self.beta1.shape
        n2, b2 = self.beta2.shape
        return Dimensions(n1, n2, b1, b2)


    def copy(self, **changes) -> 'VariationalState':
        fields = dict(
            beta1=self.beta1, beta2=self.beta2, rho=self.rho,
            elbo=self.elbo, degenerate_init=self.degenerate_init,
        )
        fields.update(changes)
        return VariationalState(**fields)


    def check(self, tol: float=1e-10) -> None:
        for name, beta in (('beta1', self.beta1), ('beta2', self.beta2)):
            if np.any(beta < 0.) or np.max(np.abs(beta.sum(axis=1) - 1.)) > tol:
                raise ValueError(f"'{name}' is not row-stochastic")
        if np.any(self.rho < 0.) or np.any(self.rho > 1.):
            raise ValueError("'rho' entries must be in [0, 1]")


class EStepWorkspace:
    """Edge-evidence terms d_ij^{ql} (log scale) and the responsibilities they were built from."""

    def __init__(self, d: np.ndarray, rho: np.ndarray) -> None:
        self.d = d
        self.rho = rho


class FitOptions:

    def __init__(
            self, max_outer_iters: int=200, inner_iters: int=5, elbo_rel_tol: float=1e-6,
            n_restarts: int=5, seed: int=0, deterministic_reduction: bool=True
        ) -> None:

        for name, value in (
                ('max_outer_iters', max_outer_iters), ('inner_iters', inner_iters),
                ('n_restarts', n_restarts)
            ):
            if int(value) < 1:
                raise ValueError(f"'{name}' must be >= 1, got {value}")
        if not elbo_rel_tol > 0.:
            raise ValueError(f"'elbo_rel_tol' must be positive, got {elbo_rel_tol}")

        self.max_outer_iters = int(max_outer_iters)
        self.inner_iters = int(inner_iters)
        self.elbo_rel_tol = float(elbo_rel_tol)
        self.n_restarts = int(n_restarts)
        self.seed = int(seed)
        self.deterministic_reduction = bool(deterministic_reduction)


    def to_dict(self) -> dict:
        return dict(
            max_outer_iters=self.max_outer_iters, inner_iters=self.inner_iters,
            elbo_rel_tol=self.elbo_rel_tol, n_restarts=self.n_restarts,
            seed=self.seed, deterministic_reduction=self.deterministic_reduction,
        )


class FitResult:

    def __init__(
            self, params: ModelParams, state: VariationalState,
            z1_hat: MembershipVector, z2_hat: MembershipVector, elbo_trace: List[float],
            converged: bool, restart_index: int, n_iter: int=0, empty_block_events: int=0,
            all_restart_elbos: Optional[List[float]]=None
        ) -> None:

        self.params = params
        self.state = state
        self.z1_hat = z1_hat
        self.z2_hat = z2_hat
        self.elbo_trace = list(elbo_trace)
        self.converged = converged
        self.restart_index = restart_index
        self.n_iter = n_iter
        self.empty_block_events = empty_block_events
        self.all_restart_elbos = list(all_restart_elbos or [])


    @property
    def elbo(self) -> float:
        return self.elbo_trace[-1]


    @property
    def dims(self) -> Dimensions:
        return self.state.dims


    def __repr__(self) -> str:
        return (
            f'FitResult(dims={self.dims}, elbo={self.elbo:.6f}, converged={self.converged}, '
            f'n_iter={self.n_iter}, restart_index={self.restart_index})'
        )
