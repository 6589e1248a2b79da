import math
import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import norm

from noisy_bisbm.exceptions import DimensionError, InputError
from noisy_bisbm.model import (
    Dimensions, NullParams, AltParams, ModelParams, log_edge_terms, log_marginal_tensor,
)
from noisy_bisbm.simulator import make, make_rng
from noisy_bisbm.multitest import adjusted_rand_index
from noisy_bisbm.inference import (
    VariationalState, FitOptions, initialize, workspace, edge_evidence, e_step, m_step, elbo, fit,
    expected_complete_loglik, variational_entropy, posterior_memberships, exact_log_likelihood,
)


def _block_data(seed, n1, n2, b1, b2):
    rng = make_rng(seed)
    z1 = rng.integers(b1, size=n1)
    z2 = rng.integers(b2, size=n2)
    pi = np.where(np.arange(b1)[:, None] == np.arange(b2)[None, :] % b1, 0.7, 0.1)
    a = rng.random((n1, n2)) < pi[np.ix_(z1, z2)]
    return np.where(a, rng.normal(2.5, 1., (n1, n2)), rng.normal(0., 1., (n1, n2)))


def _two_component_em(x, n_iter=5000):
    pi, mu, sigma_sq, sigma0_sq = 0.5, 2., 1., 1.
    for _ in range(n_iter):
        g = np.exp(-(x - mu) ** 2 / (2. * sigma_sq)) / np.sqrt(2. * np.pi * sigma_sq)
        g0 = np.exp(-x ** 2 / (2. * sigma0_sq)) / np.sqrt(2. * np.pi * sigma0_sq)
        r = pi * g / (pi * g + (1. - pi) * g0)
        pi = r.mean()
        mu = np.sum(r * x) / r.sum()
        sigma_sq = np.sum(r * (x - mu) ** 2) / r.sum()
        sigma0_sq = np.sum((1. - r) * x ** 2) / (1. - r).sum()
    return pi, mu, sigma_sq, sigma0_sq


def _gauss(x, mu, sigma_sq):
    return math.exp(-(x - mu) ** 2 / (2. * sigma_sq)) / math.sqrt(2. * math.pi * sigma_sq)


def _scalar_e_step(x, params, beta1, beta2):
    """One inner sweep written entry by entry: rows first, then columns against the new rows."""
    n1, n2 = x.shape
    b1, b2 = params.blocks
    d = np.empty((n1, n2, b1, b2))
    for i, j, q, l in itertools.product(range(n1), range(n2), range(b1), range(b2)):
        pi = params.pi[q, l]
        g = _gauss(x[i, j], params.alt_params.mu[q, l], params.alt_params.sigma_sq[q, l])
        g0 = _gauss(x[i, j], 0., params.null_params.sigma0_sq)
        rho = pi * g / (pi * g + (1. - pi) * g0)
        d[i, j, q, l] = rho * math.log(pi * g / rho) + (1. - rho) * math.log((1. - pi) * g0 / (1. - rho))

    new1 = np.empty((n1, b1))
    for i in range(n1):
        w = [
            params.alpha1[q] * math.exp(sum(beta2[j, l] * d[i, j, q, l] for j in range(n2) for l in range(b2)))
            for q in range(b1)
        ]
        new1[i] = np.array(w) / sum(w)

    new2 = np.empty((n2, b2))
    for j in range(n2):
        w = [
            params.alpha2[l] * math.exp(sum(new1[i, q] * d[i, j, q, l] for i in range(n1) for q in range(b1)))
            for l in range(b2)
        ]
        new2[j] = np.array(w) / sum(w)
    return new1, new2


def _weighted_m_step(x, beta1, beta2, rho):
    n1, n2 = x.shape
    b1, b2 = beta1.shape[1], beta2.shape[1]
    pi, mu, sigma_sq = np.empty((b1, b2)), np.empty((b1, b2)), np.empty((b1, b2))
    null_weight = null_moment = 0.
    for q, l in itertools.product(range(b1), range(b2)):
        block = edge = first = 0.
        for i, j in itertools.product(range(n1), range(n2)):
            w = beta1[i, q] * beta2[j, l]
            block += w
            edge += w * rho[i, j, q, l]
            first += w * rho[i, j, q, l] * x[i, j]
            null_weight += w * (1. - rho[i, j, q, l])
            null_moment += w * (1. - rho[i, j, q, l]) * x[i, j] ** 2
        pi[q, l] = edge / block
        mu[q, l] = first / edge
        second = 0.
        for i, j in itertools.product(range(n1), range(n2)):
            second += beta1[i, q] * beta2[j, l] * rho[i, j, q, l] * (x[i, j] - mu[q, l]) ** 2
        sigma_sq[q, l] = second / edge
    return beta1.mean(axis=0), beta2.mean(axis=0), pi, mu, sigma_sq, null_moment / null_weight


def _row_stochastic(rng, n, b):
    beta = rng.random((n, b)) + 0.1
    return beta / beta.sum(axis=1, keepdims=True)


def _assert_monotone(seed, max_n1=30, max_n2=40):
    rng = make_rng(100 + seed)
    n1, n2 = int(rng.integers(8, max_n1 + 1)), int(rng.integers(8, max_n2 + 1))
    b1, b2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    x = _block_data(seed, n1, n2, b1, b2)
    result = fit(x, Dimensions(n1, n2, b1, b2), FitOptions(n_restarts=2, seed=seed))
    trace = np.array(result.elbo_trace)
    drops = trace[:-1] - trace[1:]
    assert np.all(drops <= 1e-8 * np.abs(trace[:-1])), trace


def _assert_bounded_by_exact_likelihood(seed):
    x = make_rng(seed).normal(size=(4, 4)) + 1.5 * (make_rng(seed + 50).random((4, 4)) < 0.3)
    dims = Dimensions(4, 4, 2, 2)
    state, params = initialize(x, dims, seed)
    for _ in range(15):
        assert exact_log_likelihood(x, params) >= elbo(x, params, state) - 1e-8
        state = e_step(x, params, state)
        params = m_step(x, state, params)
        assert exact_log_likelihood(x, params) >= elbo(x, params, state) - 1e-8


def _assert_matches_two_component_em(seed):
    rng = make_rng(seed)
    a = rng.random((40, 50)) < 0.3
    x = np.where(a, rng.normal(3., 1., a.shape), rng.normal(0., 1., a.shape))
    result = fit(x, Dimensions(40, 50), FitOptions(elbo_rel_tol=1e-15, max_outer_iters=5000))
    pi, mu, sigma_sq, sigma0_sq = _two_component_em(x)
    params = result.params
    assert_allclose(params.pi[0, 0], pi, atol=1e-6)
    assert_allclose(params.alt_params.mu[0, 0], mu, atol=1e-6)
    assert_allclose(params.alt_params.sigma_sq[0, 0], sigma_sq, atol=1e-6)
    assert_allclose(params.null_params.sigma0_sq, sigma0_sq, atol=1e-6)


class TestFitOptions:

    def test_validation(self):
        with pytest.raises(ValueError):
            FitOptions(n_restarts=0)
        with pytest.raises(ValueError):
            FitOptions(elbo_rel_tol=0.)

    def test_to_dict(self):
        assert FitOptions(seed=3).to_dict()['seed'] == 3


class TestInitialize:

    def test_single_block_pair(self):
        x = make_rng(0).normal(size=(6, 7))
        state, params = initialize(x, Dimensions(6, 7), 0)
        assert np.all(state.beta1 == 1.)
        assert np.all(state.beta2 == 1.)
        assert params.blocks == (1, 1)

    def test_separated_rows_split_exactly(self):
        rng = make_rng(2)
        x = np.vstack([5. + 0.1 * rng.normal(size=(6, 8)), -5. + 0.1 * rng.normal(size=(6, 8))])
        state, _ = initialize(x, Dimensions(12, 8, 2, 1), 3)
        labels = state.beta1.argmax(axis=1)
        assert len(set(labels[:6])) == 1
        assert len(set(labels[6:])) == 1
        assert labels[0] != labels[6]
        assert_allclose(state.beta1.max(axis=1), 0.95)
        assert not state.degenerate_init

    def test_pure_null_edge_probabilities(self):
        x = make_rng(4).normal(size=(60, 80))
        _, params = initialize(x, Dimensions(60, 80, 2, 2), 0)
        candidate = np.abs(x) > norm.isf(0.25)
        # block-averaged thresholding keeps the overall edge rate
        overall = np.einsum('q,l,ql->', params.alpha1, params.alpha2, params.pi)
        assert_allclose(overall, candidate.mean(), rtol=1e-10)
        assert abs(candidate.mean() - 0.5) < 0.03
        assert np.all(np.abs(params.pi - 0.5) < 0.1)

    def test_reproducible(self):
        x = _block_data(1, 15, 20, 2, 2)
        first, _ = initialize(x, Dimensions(15, 20, 2, 2), 9)
        second, _ = initialize(x, Dimensions(15, 20, 2, 2), 9)
        assert np.array_equal(first.beta1, second.beta1)
        assert np.array_equal(first.rho, second.rho)


class TestEStep:

    def test_matches_scalar_sweep(self, two_block_params):
        x = np.array([[0.3, 2.8], [-1.1, 1.4]])
        beta1 = np.array([[0.7, 0.3], [0.2, 0.8]])
        beta2 = np.array([[0.5, 0.5], [0.9, 0.1]])
        state = VariationalState(beta1, beta2, np.zeros((2, 2, 2, 2)))
        updated = e_step(x, two_block_params, state, inner_iters=1)
        expected1, expected2 = _scalar_e_step(x, two_block_params, beta1, beta2)
        assert_allclose(updated.beta1, expected1, rtol=0., atol=1e-12)
        assert_allclose(updated.beta2, expected2, rtol=0., atol=1e-12)

    def test_uniform_rows_when_evidence_ignores_row_block(self):
        params = ModelParams(
            [0.5, 0.5], [0.4, 0.6], [[0.8, 0.1], [0.8, 0.1]],
            NullParams(), AltParams([[3., 1.], [3., 1.]], np.ones((2, 2))),
        )
        rng = make_rng(5)
        x = rng.normal(size=(4, 5))
        state = VariationalState(_row_stochastic(rng, 4, 2), _row_stochastic(rng, 5, 2), np.zeros((4, 5, 2, 2)))
        updated = e_step(x, params, state)
        assert_allclose(updated.beta1, 0.5, rtol=0., atol=1e-12)
        updated.check()

    def test_refreshes_responsibilities(self, two_block_params):
        x = make_rng(6).normal(size=(3, 4))
        state = VariationalState(np.full((3, 2), 0.5), np.full((4, 2), 0.5), np.zeros((3, 4, 2, 2)))
        updated = e_step(x, two_block_params, state)
        assert_allclose(updated.rho, workspace(x, two_block_params).rho)


class TestEdgeEvidence:

    def test_equals_log_marginal_at_posterior(self, two_block_params):
        x = make_rng(7).normal(1., 2., size=(5, 6))
        ws = workspace(x, two_block_params)
        assert_allclose(ws.d, log_marginal_tensor(x, two_block_params), rtol=1e-10)

    def test_bounded_by_log_marginal(self, two_block_params):
        rng = make_rng(8)
        x = rng.normal(size=(5, 6))
        log_edge, log_no_edge = log_edge_terms(x, two_block_params)
        for rho in (rng.random(log_edge.shape), np.zeros(log_edge.shape), np.ones(log_edge.shape)):
            d = edge_evidence(rho, log_edge, log_no_edge)
            assert np.all(np.isfinite(d))
            assert np.all(d <= log_marginal_tensor(x, two_block_params) + 1e-12)


class TestElbo:

    @pytest.mark.parametrize('seed', range(8))
    def test_monotone(self, seed):
        _assert_monotone(seed)

    @pytest.mark.slow
    def test_monotone_full(self):
        for seed in range(100):
            _assert_monotone(seed, max_n1=60, max_n2=80)

    def test_decomposition(self):
        x = _block_data(0, 15, 20, 2, 2)
        result = fit(x, Dimensions(15, 20, 2, 2), FitOptions(n_restarts=1))
        value = elbo(x, result.params, result.state)
        complete = expected_complete_loglik(x, result.params, result.state)
        entropy = variational_entropy(x, result.params, result.state)
        assert entropy >= 0.
        assert_allclose(value, complete + entropy, rtol=1e-10)

    @pytest.mark.parametrize('seed', range(5))
    def test_bounded_by_exact_likelihood(self, seed):
        _assert_bounded_by_exact_likelihood(seed)

    @pytest.mark.slow
    def test_bounded_by_exact_likelihood_full(self):
        for seed in range(20):
            _assert_bounded_by_exact_likelihood(seed)

    def test_single_block_elbo_is_log_likelihood(self, single_block_params):
        x = make_rng(0).normal(size=(3, 4))
        state = VariationalState(np.ones((3, 1)), np.ones((4, 1)), np.zeros((3, 4, 1, 1)))
        assert_allclose(elbo(x, single_block_params, state), exact_log_likelihood(x, single_block_params))


class TestFit:

    def test_single_block_matches_two_component_em(self):
        for seed in range(3):
            _assert_matches_two_component_em(seed)

    @pytest.mark.slow
    def test_single_block_matches_two_component_em_full(self):
        for seed in range(10):
            _assert_matches_two_component_em(seed)

    def test_single_block_runs_one_restart(self):
        x = make_rng(1).normal(size=(10, 12))
        result = fit(x, Dimensions(10, 12), FitOptions(n_restarts=4))
        assert len(result.all_restart_elbos) == 1

    @pytest.mark.parametrize('blocks', [(1, 1), (2, 2), (3, 2)])
    def test_all_zero_input(self, blocks):
        result = fit(np.zeros((10, 12)), Dimensions(10, 12, *blocks), FitOptions(n_restarts=2))
        assert np.isfinite(result.elbo)
        assert np.all(result.params.pi < 1e-6)
        result.state.check()

    def test_recovers_memberships(self):
        scenario = make('comparison', seed=5)
        result = fit(scenario.x, Dimensions(40, 60, 2, 3), FitOptions(seed=5))
        assert adjusted_rand_index(result.z1_hat, scenario.truth.z1) >= 0.9
        assert adjusted_rand_index(result.z2_hat, scenario.truth.z2) >= 0.9
        assert result.params.alpha1.sum() == pytest.approx(1.)

    def test_canonical_order(self):
        scenario = make('comparison', seed=2)
        result = fit(scenario.x, Dimensions(40, 60, 2, 3), FitOptions(seed=2))
        assert np.all(np.diff(result.params.alpha1) <= 0.)
        assert np.all(np.diff(result.params.alpha2) <= 0.)

    def test_deterministic(self):
        x = _block_data(3, 20, 25, 2, 2)
        opts = FitOptions(seed=11, n_restarts=2)
        first = fit(x, Dimensions(20, 25, 2, 2), opts)
        second = fit(x, Dimensions(20, 25, 2, 2), opts)
        assert first.elbo_trace == second.elbo_trace
        assert first.z1_hat.labels.tolist() == second.z1_hat.labels.tolist()

    def test_state_is_valid(self):
        x = _block_data(4, 20, 25, 3, 2)
        result = fit(x, Dimensions(20, 25, 3, 2), FitOptions(n_restarts=1))
        result.state.check()
        assert result.n_iter >= 1

    def test_non_finite_input(self):
        x = np.zeros((4, 4))
        x[1, 2] = np.inf
        with pytest.raises(InputError):
            fit(x, Dimensions(4, 4))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            fit(np.zeros((4, 5)), Dimensions(5, 4))


class TestMStep:

    def test_single_block_all_edges(self):
        x = make_rng(12).normal(1., 2., size=(7, 9))
        state = VariationalState(np.ones((7, 1)), np.ones((9, 1)), np.ones((7, 9, 1, 1)))
        params = m_step(x, state)
        assert_allclose(params.alt_params.mu[0, 0], x.mean(), rtol=1e-12)
        assert_allclose(params.alt_params.sigma_sq[0, 0], x.var(), rtol=1e-12)
        assert params.pi[0, 0] == pytest.approx(1.)

    def test_single_block_no_edges(self):
        x = make_rng(13).normal(size=(7, 9))
        state = VariationalState(np.ones((7, 1)), np.ones((9, 1)), np.zeros((7, 9, 1, 1)))
        params = m_step(x, state)
        assert_allclose(params.null_params.sigma0_sq, np.mean(x ** 2), rtol=1e-12)
        assert params.pi[0, 0] <= 1e-9
        assert params.alt_params.frozen[0, 0]

    def test_matches_weighted_sums(self):
        rng = make_rng(14)
        x = rng.normal(size=(3, 4))
        beta1, beta2 = _row_stochastic(rng, 3, 2), _row_stochastic(rng, 4, 3)
        rho = rng.uniform(0.05, 0.95, size=(3, 4, 2, 3))
        params = m_step(x, VariationalState(beta1, beta2, rho))
        alpha1, alpha2, pi, mu, sigma_sq, sigma0_sq = _weighted_m_step(x, beta1, beta2, rho)
        assert_allclose(params.alpha1, alpha1, rtol=1e-12)
        assert_allclose(params.alpha2, alpha2, rtol=1e-12)
        assert_allclose(params.pi, pi, rtol=1e-12)
        assert_allclose(params.alt_params.mu, mu, rtol=1e-12)
        assert_allclose(params.alt_params.sigma_sq, sigma_sq, rtol=1e-12)
        assert_allclose(params.null_params.sigma0_sq, sigma0_sq, rtol=1e-12)

    def test_empty_block_keeps_previous_alternative(self, two_block_params):
        x = make_rng(3).normal(size=(6, 5))
        beta1 = np.tile([1., 0.], (6, 1))
        beta2 = np.tile([0.5, 0.5], (5, 1))
        state = VariationalState(beta1, beta2, np.full((6, 5, 2, 2), 0.5))
        params = m_step(x, state, two_block_params)
        assert params.alt_params.frozen[1].all()
        assert_allclose(params.alt_params.mu[1], two_block_params.alt_params.mu[1])
        assert not params.alt_params.frozen[0].any()

    def test_posterior_memberships_break_ties_low(self):
        state = VariationalState(
            np.array([[0.5, 0.5], [0.2, 0.8]]), np.array([[1.]]), np.zeros((2, 1, 2, 1)),
        )
        z1, z2 = posterior_memberships(state)
        assert z1.labels.tolist() == [1, 2]
        assert z2.labels.tolist() == [1]


@pytest.mark.slow
def test_nested_graph_block_probabilities():
    hits = 0
    for seed in range(9):
        scenario = make('scenario-b', seed=seed)
        result = fit(scenario.x, Dimensions(150, 200, 2, 2), FitOptions(seed=seed))
        pi = np.sort(result.params.pi.ravel())
        hits += pi[0] <= 0.05 and pi[1] >= 0.9
    assert hits > 4
