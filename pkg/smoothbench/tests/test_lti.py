# File: smoothbench/tests/test_lti.py

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import linalg as sla
from scipy.integrate import solve_ivp

from smoothbench.core import matops
from smoothbench.core.errors import RankError
from smoothbench.lti.systems import (
    balance,
    balance_full,
    hankel_tail_bound,
    impulse_error_sq,
    observability_gramian,
    observability_gramian_weighted,
    project,
    propagate,
    reachability_gramian,
    simulate_unforced,
)
from smoothbench.models.linalg_types import SymmetricFactor
from smoothbench.models.lti_types import BalancedBases, LtiSystem
from smoothbench.reducers.bounds import canonical_bt
from smoothbench.tests.cases import quadrature_grid, random_stable


def _factor(m: np.ndarray) -> SymmetricFactor:
    return matops.factor_psd(m)


def test_balance_identity_pair_gives_orthogonal_projector() -> None:
    eye = matops.symmetric_factor(np.eye(4))
    full = balance(eye, eye, 4)
    assert_allclose(full.sigma, np.ones(4))
    assert_allclose(full.projector(), np.eye(4), atol=1e-12)

    proj = balance(eye, eye, 2).projector()
    assert_allclose(proj @ proj, proj, atol=1e-12)
    assert_allclose(proj, proj.T, atol=1e-12)
    assert np.trace(proj) == pytest.approx(2.0)


def test_balance_two_by_two_by_hand() -> None:
    bases = balance(_factor(np.diag([4.0, 1.0])), _factor(np.eye(2)), 1)
    assert_allclose(bases.sigma, [2.0])
    assert abs(bases.w[1, 0]) < 1e-12
    assert abs(bases.w[0, 0]) > 0.0


def test_balance_rank_deficient_reachability() -> None:
    p = matops.symmetric_factor(np.array([[1.0], [0.0]]))
    q = _factor(np.eye(2))
    bases = balance(p, q, 1)
    assert_allclose(bases.sigma, [1.0])
    assert abs(bases.w[1, 0]) < 1e-12
    assert balance_full(p, q).r == 1
    with pytest.raises(RankError) as info:
        balance(p, q, 2)
    assert info.value.attainable == 1


def test_balanced_bases_invariants(rng: np.random.Generator) -> None:
    sys = random_stable(6, 2, 2, seed=12)
    p = reachability_gramian(sys)
    q = observability_gramian(sys)
    bases = balance_full(p, q)
    assert_allclose(bases.v.T @ bases.w, np.eye(bases.r), atol=1e-8)
    tol = 1e-8 * bases.sigma[0]
    assert_allclose(bases.w.T @ q.dense() @ bases.w, np.diag(bases.sigma), atol=tol)
    assert_allclose(bases.v.T @ p.dense() @ bases.v, np.diag(bases.sigma), atol=tol)
    assert np.all(np.diff(bases.sigma) <= 0.0)


def test_balanced_bases_reject_increasing_sigma() -> None:
    with pytest.raises(ValueError):
        BalancedBases(w=np.eye(2), v=np.eye(2), sigma=np.array([1.0, 2.0]))


def test_project_identity_and_rank_one() -> None:
    sys = random_stable(3, 1, 1, seed=0)
    full = project(sys, BalancedBases(w=np.eye(3), v=np.eye(3), sigma=np.ones(3)))
    assert_allclose(full.a_r, sys.a)

    diag_sys = LtiSystem(a=np.diag([-1.0, -2.0]), c=np.ones((1, 2)))
    e1 = np.array([[1.0], [0.0]])
    reduced = project(diag_sys, BalancedBases(w=e1, v=e1, sigma=np.ones(1)))
    assert_allclose(reduced.a_r, [[-1.0]])
    assert_allclose(reduced.c_r, [[1.0]])


def test_full_rank_projection_is_similarity() -> None:
    sys = random_stable(5, 2, 2, seed=21)
    bases = balance_full(reachability_gramian(sys), observability_gramian(sys))
    assert bases.r == 5
    reduced = project(sys, bases)
    assert_allclose(
        np.sort_complex(np.linalg.eigvals(reduced.a_r)),
        np.sort_complex(np.linalg.eigvals(sys.a)),
        atol=1e-8,
    )


def test_simulate_unforced_trivial_cases() -> None:
    sys = LtiSystem(a=np.array([[-1.0]]), c=np.array([[1.0]]))
    y = simulate_unforced(sys, np.array([1.0]), np.array([1.0, 2.0]))
    assert_allclose(y[:, 0], [np.exp(-1.0), np.exp(-2.0)], rtol=1e-14)

    big = random_stable(4, 2, 1, seed=3)
    assert_allclose(simulate_unforced(big, np.zeros(4), np.array([0.5, 1.0])), 0.0)


def test_simulate_unforced_matches_ode_integrator(rng: np.random.Generator) -> None:
    sys = random_stable(6, 2, 1, seed=30)
    x0 = rng.standard_normal(6)
    times = np.array([0.1, 0.35, 0.6, 1.4, 2.0, 3.3])
    sol = solve_ivp(
        lambda _t, x: sys.a @ x, (0.0, 3.3), x0, t_eval=times, method="DOP853", rtol=1e-13, atol=1e-14
    )
    assert_allclose(simulate_unforced(sys, x0, times), (sys.c @ sol.y).T, atol=1e-8)


def test_propagate_matrix_initial_states(rng: np.random.Generator) -> None:
    sys = random_stable(4, 2, 1, seed=31)
    x0 = rng.standard_normal((4, 3))
    times = np.array([0.2, 0.4, 0.6, 1.5])
    out = propagate(sys.a, sys.c, x0, times)
    assert out.shape == (4, 2, 3)
    for k, t in enumerate(times):
        assert_allclose(out[k], sys.c @ matops.expm(sys.a, t) @ x0, atol=1e-12)


def test_reachability_gramian_examples() -> None:
    sys = LtiSystem(a=np.diag([-1.0, -2.0]), c=np.ones((1, 2)), b=np.eye(2))
    assert_allclose(reachability_gramian(sys).dense(), np.diag([0.5, 0.25]), atol=1e-14)

    zero_input = sys.with_input(np.zeros((2, 1)))
    p = reachability_gramian(zero_input)
    assert p.rank == 0
    assert_allclose(p.dense(), 0.0)


def test_reachability_gramian_residual() -> None:
    sys = random_stable(7, 2, 3, seed=40)
    assert sys.b is not None
    p = reachability_gramian(sys).dense()
    residual = sys.a @ p + p @ sys.a.T + sys.b @ sys.b.T
    assert np.linalg.norm(residual) <= 1e-8 * np.linalg.norm(sys.b @ sys.b.T)


def test_observability_gramian_weighted_examples() -> None:
    sys = LtiSystem(a=np.array([[-1.0]]), c=np.array([[1.0]]))
    assert_allclose(observability_gramian_weighted(sys, np.array([[1.0]])).dense(), [[0.5]])
    assert_allclose(observability_gramian_weighted(sys, np.array([[4.0]])).dense(), [[0.125]])


def test_observability_gramian_weighted_matches_quadrature() -> None:
    sys = random_stable(4, 2, 1, seed=41)
    noise_cov = np.array([[0.5, 0.1], [0.1, 0.3]])
    q = observability_gramian_weighted(sys, noise_cov).dense()
    nodes, weights = quadrature_grid(40.0, 80, 16)
    weighted = sys.c.T @ np.linalg.inv(noise_cov) @ sys.c
    oracle = np.zeros((4, 4))
    for t, w in zip(nodes, weights):
        e = matops.expm(sys.a, t)
        oracle += w * (e.T @ weighted @ e)
    assert_allclose(q, oracle, rtol=1e-6, atol=1e-9 * np.linalg.norm(oracle))


def test_stable_flag() -> None:
    assert random_stable(4, 1, 1, seed=0).stable
    assert not LtiSystem(a=np.diag([0.1, -1.0]), c=np.ones((1, 2))).stable


@pytest.mark.parametrize(
    "sigma, r, expected",
    [([3.0, 2.0, 1.0], 1, 6.0), ([3.0, 2.0, 1.0], 3, 0.0), ([1.0, 0.1, 0.01], 2, 0.02)],
)
def test_hankel_tail_bound_examples(sigma: list[float], r: int, expected: float) -> None:
    assert hankel_tail_bound(np.array(sigma), r) == pytest.approx(expected)


def test_impulse_error_matches_quadrature() -> None:
    sys = random_stable(5, 2, 2, seed=50)
    reduced, _ = canonical_bt(sys, 2)
    red = reduced.as_system()
    assert sys.b is not None and red.b is not None
    nodes, weights = quadrature_grid(80.0, 160, 16)
    h = propagate(sys.a, sys.c, sys.b, nodes)
    h_r = propagate(red.a, red.c, red.b, nodes)
    oracle = float(np.sum(weights[:, None, None] * (h - h_r) ** 2))
    assert impulse_error_sq(sys, red) == pytest.approx(oracle, rel=1e-6)


def _pulse_augmented(sys: LtiSystem, column: int, decay: float) -> LtiSystem:
    """Impulse response of this system equals the response of `sys` to the unit-energy input
    u(t) = √(2·decay)·e^{−decay·t} on one input channel."""
    assert sys.b is not None
    d = sys.d
    a = np.zeros((d + 1, d + 1))
    a[:d, :d] = sys.a
    a[:d, d] = sys.b[:, column]
    a[d, d] = -decay
    b = np.zeros((d + 1, 1))
    b[d, 0] = np.sqrt(2.0 * decay)
    return LtiSystem(a=a, c=np.hstack([sys.c, np.zeros((sys.d_out, 1))]), b=b)


@pytest.mark.parametrize("seed", range(20))
def test_hankel_bound_for_unit_energy_pulses(seed: int) -> None:
    d = 3 + seed % 6
    sys = random_stable(d, 2, 2, seed=100 + seed)
    _, full = canonical_bt(sys, 0)
    for r in range(full.r):
        reduced, _ = canonical_bt(sys, r)
        bound = hankel_tail_bound(full.sigma, r)
        for column in range(2):
            for decay in (0.3, 2.0):
                err_sq = impulse_error_sq(
                    _pulse_augmented(sys, column, decay),
                    _pulse_augmented(reduced.as_system(), column, decay),
                )
                assert np.sqrt(err_sq) <= bound * (1.0 + 1e-6) + 1e-10


@pytest.mark.parametrize("seed", range(10))
def test_canonical_truncation_inherits_stability(seed: int) -> None:
    sys = random_stable(6, 2, 2, seed=200 + seed)
    _, full = canonical_bt(sys, 0)
    for r in range(1, full.r + 1):
        if full.sigma[r - 1] <= 1e-6 * full.sigma[0]:
            break
        reduced, _ = canonical_bt(sys, r)
        assert np.max(np.linalg.eigvals(reduced.a_r).real) < 0.0


@pytest.mark.parametrize("seed", range(50))
def test_balanced_projectors_are_oblique_projectors(seed: int) -> None:
    rng = np.random.default_rng(900 + seed)
    d = 3 + seed % 6
    # every other case has a rank-deficient P
    p_cols = d - 1 - seed % (d - 1) if seed % 2 else d
    p = matops.symmetric_factor(rng.standard_normal((d, p_cols)))
    q = matops.symmetric_factor(rng.standard_normal((d, d)))
    full = balance_full(p, q)
    assert full.r == p_cols
    r = 1 + seed % full.r
    bases = balance(p, q, r)
    proj = bases.projector()
    assert np.linalg.norm(proj @ proj - proj) <= 1e-8 * np.linalg.norm(proj)
    assert_allclose(bases.v.T @ bases.w, np.eye(r), atol=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_square_root_balancing_matches_gramian_product_eigenvectors(seed: int) -> None:
    sys = random_stable(5, 2, 2, seed=40 + seed)
    p = reachability_gramian(sys)
    q = observability_gramian(sys)
    bases = balance_full(p, q)
    assert bases.r == 5

    vals, vecs = np.linalg.eig(p.dense() @ q.dense())
    order = np.argsort(-vals.real)
    vals, vecs = vals.real[order], vecs.real[:, order]
    assert_allclose(np.sqrt(vals[:2]), bases.sigma[:2], rtol=1e-6)

    # compare leading subspaces where the spectral gap is widest
    ratios = bases.sigma[:-1] / bases.sigma[1:]
    r = int(np.argmax(ratios[:2])) + 1
    angles = sla.subspace_angles(vecs[:, :r], bases.w[:, :r])
    assert np.max(angles) < 1e-6
