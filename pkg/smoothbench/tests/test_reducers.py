# File: smoothbench/tests/test_reducers.py

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import linalg as sla

from smoothbench.core import matops
from smoothbench.core.errors import RankError
from smoothbench.inference.metrics import forstner_distance, restricted_metrics
from smoothbench.inference.smoother import (
    build_problem,
    build_restricted,
    exact_posterior,
    fisher_factor,
    generate_data,
    lift_restricted,
    noise_free_outputs,
    restricted_posterior,
    sample_prior,
)
from smoothbench.lti.systems import (
    balance_full,
    observability_gramian_weighted,
    propagate,
    whitened_output,
)
from smoothbench.models.belief import GaussianBelief, ObservationSetup, SmoothingProblem
from smoothbench.reducers.lis_bt import LisBtReducer, lis_bt_posterior
from smoothbench.reducers.olr import (
    OlrReducer,
    olr_posterior,
    random_update_competitor,
    restricted_olr_forstner_sq,
)
from smoothbench.reducers.pd_bt import PdBtReducer, pd_bt_posterior
from smoothbench.reducers.registry import default_registry
from smoothbench.tests.cases import (
    build_case,
    dense_posterior,
    get_case,
    random_forward,
    random_stable,
    stacked_noise,
)


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def _data(problem: SmoothingProblem, seed: int) -> np.ndarray:
    truth = sample_prior(problem.prior, seed)
    return generate_data(problem.system, problem.obs, truth, seed + 1)


# --- OLR ---------------------------------------------------------------------


def test_olr_full_rank_equals_exact(toy_problem: SmoothingProblem) -> None:
    problem = toy_problem
    data = _data(problem, 0)
    reducer = OlrReducer()
    s = reducer.prepare(problem)
    olr = reducer.posterior(data, s)
    exact = exact_posterior(problem.prior, problem.forward, problem.obs, data)
    assert _rel(olr.covariance(), exact.covariance()) <= 1e-8
    assert _rel(olr.mean, exact.mean) <= 1e-8


def test_olr_rank_zero_is_prior(toy_problem: SmoothingProblem) -> None:
    problem = toy_problem
    post = olr_posterior(problem.prior, problem.forward, problem.obs, _data(problem, 1), 0)
    assert_allclose(post.mean, problem.prior.mean)
    assert_allclose(post.covariance(), problem.prior.covariance(), atol=1e-14)


def test_olr_matches_brute_force_eigendecomposition(three_state_problem: SmoothingProblem) -> None:
    problem = three_state_problem
    assert problem.prior.rank == 2
    data = _data(problem, 2)
    olr = olr_posterior(problem.prior, problem.forward, problem.obs, data, 1)

    # dense LIS: eigenvectors of Lᵀ·H·L give the update directions
    l = problem.prior.cov_factor.factor
    g = problem.forward.assembled
    obs_cov = stacked_noise(problem.obs)
    h = g.T @ np.linalg.solve(obs_cov, g)
    lam, psi = np.linalg.eigh(l.T @ h @ l)
    lam, psi = lam[::-1], psi[:, ::-1]
    proj = l @ np.outer(psi[:, 0], psi[:, 0]) @ l.T @ h / lam[0]
    mean, cov = dense_posterior(l @ l.T, g @ proj, obs_cov, data)
    assert _rel(olr.covariance(), cov) <= 1e-8
    assert _rel(olr.mean, mean) <= 1e-8

    shrink = np.eye(2) - (lam[0] / (1.0 + lam[0])) * np.outer(psi[:, 0], psi[:, 0])
    assert _rel(olr.covariance(), l @ shrink @ l.T) <= 1e-8


@pytest.mark.parametrize("seed", range(20))
def test_olr_restricted_reconstruction(seed: int) -> None:
    rng = np.random.default_rng(500 + seed)
    fwd = random_forward(10, 2, 20, 500 + seed)
    obs = ObservationSetup.from_noise_std(np.arange(1.0, 11.0), [0.5, 0.5])
    prior = GaussianBelief.centered(matops.symmetric_factor(rng.standard_normal((20, 12))))
    data = rng.standard_normal(obs.n_obs)

    rp = build_restricted(prior, fwd, obs)
    assert rp.s == 12
    mean_hat, cov_hat = restricted_posterior(rp, obs, data)
    reducer = OlrReducer()
    reducer.prepare_from(prior, fwd, obs)
    for r in (3, 8, 12):
        # restricted OLR keeps the leading r coordinates of the restricted posterior
        cut_mean = np.where(np.arange(rp.s) < r, mean_hat, 0.0)
        cut_cov = np.diag(np.where(np.arange(rp.s) < r, np.diag(cov_hat), rp.prior_diag))
        lifted = lift_restricted(rp, cut_mean, cut_cov)
        olr = reducer.posterior(data, r)
        assert _rel(lifted.covariance(), olr.covariance()) <= 1e-8
        assert _rel(lifted.mean, olr.mean) <= 1e-8


@pytest.mark.parametrize("seed", range(7))
def test_full_rank_olr_equals_generalized_eigenvalue_update(seed: int) -> None:
    rng = np.random.default_rng(3000 + seed)
    d = 3 + 2 * seed
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    factor = q * rng.uniform(0.5, 1.5, size=d)
    prior = GaussianBelief.centered(matops.symmetric_factor(factor))
    fwd = random_forward(3, 2, d, 3000 + seed)
    obs = ObservationSetup.from_noise_std([1.0, 2.0, 3.0], [0.4, 0.6])
    data = rng.standard_normal(obs.n_obs)

    # (H, Γ_pr⁻¹) pencil, eigenvectors normalized so wᵀ·Γ_pr⁻¹·w = 1
    prior_cov = factor @ factor.T
    g = fwd.assembled
    h = g.T @ np.linalg.solve(stacked_noise(obs), g)
    delta_sq, w = sla.eigh(h, np.linalg.inv(prior_cov))
    delta_sq, w = np.clip(delta_sq[::-1], 0.0, None), w[:, ::-1]

    r = 1 + seed % min(4, d)
    lead = w[:, :r]
    optimal = prior_cov - (lead * (delta_sq[:r] / (1.0 + delta_sq[:r]))) @ lead.T
    olr = olr_posterior(prior, fwd, obs, data, r)
    assert _rel(olr.covariance(), optimal) <= 1e-8

    exact = exact_posterior(prior, fwd, obs, data)
    loss = forstner_distance(exact.covariance(), olr.covariance()) ** 2
    assert loss == pytest.approx(float(np.sum(np.log1p(delta_sq[r:]) ** 2)), rel=1e-6, abs=1e-10)


def test_olr_rank_above_attainable_is_refused(toy_problem: SmoothingProblem) -> None:
    reducer = OlrReducer()
    s = reducer.prepare(toy_problem)
    with pytest.raises(RankError):
        reducer.posterior(_data(toy_problem, 3), s + 1)


# --- restricted optimality ---------------------------------------------------


def test_olr_dominates_balanced_truncation_and_random_updates(
    toy_problem: SmoothingProblem,
) -> None:
    problem = toy_problem
    assert problem.prior.rank == 5
    rp = build_restricted(problem.prior, problem.forward, problem.obs)
    registry = default_registry()
    registry.prepare_all(problem)
    data = _data(problem, 4)
    exact_restricted = restricted_posterior(rp, problem.obs, data)
    gen = np.random.default_rng(77)

    def restricted_forstner(method: str, r: int) -> float:
        approx = registry.get(method).posterior(data, r)
        value = restricted_metrics(rp, approx, exact_restricted).forstner
        assert value is not None
        return value

    for r in range(1, rp.s + 1):
        olr = restricted_forstner("OLR", r)
        assert olr**2 == pytest.approx(restricted_olr_forstner_sq(rp.prior_diag, r), rel=1e-6, abs=1e-12)
        for method in ("LisBT", "PdBT"):
            assert olr <= restricted_forstner(method, r) * (1.0 + 1e-9) + 1e-9
        for _ in range(200):
            competitor = random_update_competitor(rp, r, gen)
            assert olr <= forstner_distance(exact_restricted[1], competitor) * (1.0 + 1e-9) + 1e-9


def test_olr_errors_do_not_grow_with_rank(toy_problem: SmoothingProblem) -> None:
    problem = toy_problem
    rp = build_restricted(problem.prior, problem.forward, problem.obs)
    reducer = OlrReducer()
    reducer.prepare(problem)
    data = _data(problem, 11)
    exact_restricted = restricted_posterior(rp, problem.obs, data)
    scores = [
        restricted_metrics(rp, reducer.posterior(data, r), exact_restricted) for r in range(rp.s + 1)
    ]
    for lo, hi in zip(scores, scores[1:]):
        assert lo.forstner is not None and hi.forstner is not None
        assert hi.forstner <= lo.forstner + 1e-10
        assert hi.mahalanobis_sq <= lo.mahalanobis_sq * (1.0 + 1e-8) + 1e-10


# --- LIS-BT ------------------------------------------------------------------


def test_lis_bt_rank_zero_is_prior(toy_problem: SmoothingProblem) -> None:
    problem = toy_problem
    post = lis_bt_posterior(problem.system, problem.prior, problem.obs, _data(problem, 5), 0)
    assert_allclose(post.covariance(), problem.prior.covariance(), atol=1e-14)
    assert post.rank_r == 0


def test_lis_bt_full_rank_compatible_prior_recovers_exact(
    four_state_problem: SmoothingProblem,
) -> None:
    problem = four_state_problem
    reducer = LisBtReducer()
    k = reducer.prepare(problem)
    assert k == 4
    data = _data(problem, 6)
    post = reducer.posterior(data, k)
    assert post.forward is not None
    assert _rel(post.forward.dense(), problem.forward.assembled) <= 1e-8
    exact = exact_posterior(problem.prior, problem.forward, problem.obs, data)
    assert _rel(post.covariance(), exact.covariance()) <= 1e-7


def test_lis_bt_approaches_optimal_update_as_observations_densify() -> None:
    # decay rates ≥ 0.5, so a 20 s window holds the whole output energy; the identity
    # prior is compatible because the symmetric part of A is negative definite
    sys = random_stable(4, 1, 1, seed=60).unforced()
    prior = GaussianBelief.centered(matops.symmetric_factor(np.eye(4)))
    q_eps = observability_gramian_weighted(sys, np.array([[0.01]])).dense()

    def gaps(t_step: float) -> tuple[float, float, float]:
        obs = ObservationSetup.equidistant(t_step, 20.0, [0.1])
        problem = build_problem(sys, prior, obs)
        fisher = fisher_factor(problem.forward, obs)
        gap = np.linalg.norm(t_step * fisher.dense() - q_eps) / np.linalg.norm(q_eps)
        lis = LisBtReducer()
        lis.prepare(problem)
        lis_w = lis.full_bases.w[:, :1]
        olr_w = balance_full(prior.cov_factor, fisher).w[:, :1]

        data = _data(problem, 7)
        rp = build_restricted(prior, problem.forward, obs)
        exact_restricted = restricted_posterior(rp, obs, data)
        olr = olr_posterior(prior, problem.forward, obs, data, 1)
        lis_loss = restricted_metrics(rp, lis.posterior(data, 1), exact_restricted).forstner
        olr_loss = restricted_metrics(rp, olr, exact_restricted).forstner
        assert lis_loss is not None and olr_loss is not None and olr_loss > 0.0
        assert lis_loss >= olr_loss * (1.0 - 1e-9)
        excess = (lis_loss - olr_loss) / olr_loss
        return float(gap), float(sla.subspace_angles(lis_w, olr_w)[0]), float(excess)

    fine_gap, fine_angle, fine_excess = gaps(0.01)
    coarse_gap, coarse_angle, coarse_excess = gaps(2.5)
    assert fine_gap < coarse_gap
    assert fine_gap < 0.1
    assert fine_angle < coarse_angle
    assert fine_excess < coarse_excess


# --- PD-BT -------------------------------------------------------------------


def test_pd_bt_full_rank_recovers_exact(four_state_problem: SmoothingProblem) -> None:
    problem = four_state_problem
    reducer = PdBtReducer()
    k = reducer.prepare(problem)
    assert k == 4
    data = _data(problem, 7)
    post = reducer.posterior(data, k)
    exact = exact_posterior(problem.prior, problem.forward, problem.obs, data)
    assert _rel(post.covariance(), exact.covariance()) <= 1e-7
    assert _rel(post.mean, exact.mean) <= 1e-7


def test_prior_driven_impulse_response_reproduces_outputs(toy_problem: SmoothingProblem) -> None:
    problem = toy_problem
    l_pr = problem.prior.cov_factor.factor
    z = np.random.default_rng(8).standard_normal(l_pr.shape[1])
    c_w = whitened_output(problem.system.c, problem.obs.noise_cov)
    h = propagate(problem.system.a, c_w, l_pr, problem.obs.times)
    y = noise_free_outputs(problem.system, problem.obs, l_pr @ z)
    assert_allclose((h @ z).reshape(-1), problem.obs.whiten(y), rtol=1e-10, atol=1e-12)


def test_pd_bt_matches_explicit_reduced_matrices(four_state_problem: SmoothingProblem) -> None:
    problem = four_state_problem
    reducer = PdBtReducer()
    reducer.prepare(problem)
    data = _data(problem, 9)
    post = pd_bt_posterior(problem.system, problem.prior, problem.obs, data, 2)

    bases = reducer.full_bases.truncate(2)
    a_r = bases.v.T @ problem.system.a @ bases.w
    c_r = problem.system.c @ bases.w
    g_pd = np.vstack([c_r @ sla.expm(a_r * t) @ bases.v.T for t in problem.obs.times])
    l = problem.prior.cov_factor.factor
    mean, cov = dense_posterior(l @ l.T, g_pd, stacked_noise(problem.obs), data)
    assert _rel(post.covariance(), cov) <= 1e-8
    assert _rel(post.mean, mean) <= 1e-8


@pytest.mark.parametrize("case_id", ["toy", "toy_compatible", "four_state_full_rank"])
def test_pd_bt_truncations_are_stable(case_id: str) -> None:
    sys, prior, obs = build_case(get_case(case_id))
    reducer = PdBtReducer()
    reducer.prepare(build_problem(sys, prior, obs))
    sigma = reducer.full_bases.sigma
    for r in range(1, reducer.attainable_rank + 1):
        if sigma[r - 1] <= 1e-6 * sigma[0]:
            break
        assert np.max(np.linalg.eigvals(reducer.reduce(r).a_r).real) < 0.0


def test_posteriors_are_rank_limited_and_psd(toy_problem: SmoothingProblem) -> None:
    registry = default_registry()
    registry.prepare_all(toy_problem)
    data = _data(toy_problem, 10)
    for name in registry.names():
        post = registry.get(name).posterior(data, 3)
        vals = np.linalg.eigvalsh(post.covariance())
        assert vals[0] >= -1e-12 * vals[-1]
        assert np.linalg.matrix_rank(post.covariance(), tol=1e-10 * vals[-1]) <= toy_problem.prior.rank
        assert post.diagnostics["sigma_tail"] >= 0.0


# --- registry ----------------------------------------------------------------


def test_registry_order_and_unknown_names(toy_problem: SmoothingProblem) -> None:
    registry = default_registry(["PdBT", "OLR"])
    assert registry.names() == ["PdBT", "OLR"]
    attainable = registry.prepare_all(toy_problem)
    assert set(attainable) == {"PdBT", "OLR"}
    assert attainable["OLR"] == toy_problem.prior.rank
    with pytest.raises(KeyError):
        default_registry(["Nope"])
