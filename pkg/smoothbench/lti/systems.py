# File: smoothbench/lti/systems.py

"""Simulation, Gramians and Petrov–Galerkin reduction of stable LTI systems."""

from typing import Optional

import numpy as np
from scipy import linalg as sla

from smoothbench.core import matops
from smoothbench.core.errors import DimensionError, RankError
from smoothbench.models.belief import check_times
from smoothbench.models.linalg_types import SymmetricFactor
from smoothbench.models.lti_types import BalancedBases, LtiSystem, ReducedLti

# relative tolerance under which two time gaps share one cached exponential
_GAP_RTOL = 1e-12


def balance_full(
    p_factor: SymmetricFactor, q_factor: SymmetricFactor, tol_rel: Optional[float] = None
) -> BalancedBases:
    """Square-root balancing at the largest attainable rank.

    With P = L·Lᵀ and Q = R·Rᵀ the SVD Rᵀ·L = U·Σ·Zᵀ gives W = L·Z·Σ^{-1/2} and
    V = R·U·Σ^{-1/2}. Only singular values above the rank tolerance are kept, so a
    rank-deficient P (or Q) simply yields fewer columns.
    """
    l, rr = p_factor.factor, q_factor.factor
    if l.shape[0] != rr.shape[0]:
        raise DimensionError(f"Gramian factors live in different spaces: {l.shape[0]} vs {rr.shape[0]}")
    u, s, vt = matops.svd(rr.T @ l)
    k = matops.numerical_rank(s, tol_rel)
    scale = 1.0 / np.sqrt(s[:k])
    w = (l @ vt[:k].T) * scale
    v = (rr @ u[:, :k]) * scale
    return BalancedBases(w=w, v=v, sigma=s[:k])


def balance(p_factor: SymmetricFactor, q_factor: SymmetricFactor, r: int) -> BalancedBases:
    full = balance_full(p_factor, q_factor)
    if r < 0 or r > full.r:
        raise RankError(r, full.r)
    return full.truncate(r)


def project(sys: LtiSystem, bases: BalancedBases) -> ReducedLti:
    if bases.d != sys.d:
        raise DimensionError(f"bases have {bases.d} rows, system state dimension is {sys.d}")
    w, v = bases.w, bases.v
    b_r = None if sys.b is None else v.T @ sys.b
    return ReducedLti(a_r=v.T @ sys.a @ w, c_r=sys.c @ w, b_r=b_r, bases=bases)


def propagate(a: np.ndarray, c: np.ndarray, x0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """c·e^{a·tₖ}·x0 for every k, stepping the state through successive time gaps.

    x0 may be a vector (result n × d_out) or a matrix of k initial states (result
    n × d_out × k). Equal gaps reuse one exponential.
    """
    times = check_times(times)
    x = np.asarray(x0, dtype=np.float64)
    vector = x.ndim == 1
    if x.shape[0] != a.shape[0]:
        raise DimensionError(f"initial state has {x.shape[0]} rows, system has {a.shape[0]} states")
    x = x[:, None] if vector else x
    out = np.zeros((times.shape[0], c.shape[0], x.shape[1]))
    if x.shape[0] == 0:
        return out[:, :, 0] if vector else out
    gaps = np.diff(times, prepend=0.0)
    last_gap, step = -1.0, np.eye(a.shape[0])
    for k, gap in enumerate(gaps):
        if abs(gap - last_gap) > _GAP_RTOL * gap:
            last_gap, step = gap, matops.expm(a, gap)
        x = step @ x
        out[k] = c @ x
    return out[:, :, 0] if vector else out


def simulate_unforced(sys: LtiSystem, x0: np.ndarray, times: np.ndarray) -> np.ndarray:
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.ndim != 1:
        raise DimensionError(f"x0 must be a state vector, got shape {x0.shape}")
    return propagate(sys.a, sys.c, x0, times)


def reachability_gramian(sys: LtiSystem) -> SymmetricFactor:
    if sys.b is None:
        raise DimensionError("reachability Gramian needs an input operator b")
    return matops.solve_lyapunov(sys.a, matops.symmetric_factor(sys.b))


def whitened_output(c: np.ndarray, noise_cov: np.ndarray) -> np.ndarray:
    """Γ_ε^{-1/2}·c through the lower Cholesky factor of Γ_ε."""
    chol = matops.cholesky_spd(noise_cov)
    return sla.solve_triangular(chol, c, lower=True)


def observability_gramian_weighted(sys: LtiSystem, noise_cov: np.ndarray) -> SymmetricFactor:
    """Factor of Q_ε with Aᵀ·Q + Q·A = −Cᵀ·Γ_ε^{-1}·C."""
    noise_cov = np.asarray(noise_cov, dtype=np.float64)
    if noise_cov.shape != (sys.d_out, sys.d_out):
        raise DimensionError(f"noise covariance is {noise_cov.shape}, system has {sys.d_out} outputs")
    c_white = whitened_output(sys.c, noise_cov)
    return matops.solve_lyapunov(sys.a.T, matops.symmetric_factor(c_white.T))


def observability_gramian(sys: LtiSystem) -> SymmetricFactor:
    return observability_gramian_weighted(sys, np.eye(sys.d_out))


def hankel_tail_bound(sigma: np.ndarray, r: int) -> float:
    sigma = np.asarray(sigma, dtype=np.float64)
    if r < 0 or r > sigma.shape[0]:
        raise DimensionError(f"rank {r} outside [0, {sigma.shape[0]}]")
    return float(2.0 * np.sum(sigma[r:]))


def impulse_error_sq(full: LtiSystem, reduced: LtiSystem) -> float:
    """‖h − h_r‖²_{L2} for h(t) = C·e^{At}·B, evaluated exactly through Gramians.

    The error system has observability Gramian [[Q, −Y], [−Yᵀ, Q_r]] where
    Aᵀ·Y + Y·A_r + Cᵀ·C_r = 0, so the squared norm is
    tr(BᵀQB) + tr(B_rᵀQ_rB_r) − 2·tr(BᵀY·B_r). Weighted norms are obtained by
    passing systems whose outputs are already whitened.
    """
    if full.b is None or reduced.b is None:
        raise DimensionError("impulse responses need input operators on both systems")
    q = observability_gramian(full).factor
    full_energy = float(np.sum((q.T @ full.b) ** 2))
    if reduced.d == 0:
        return full_energy
    q_r = observability_gramian(reduced).factor
    red_energy = float(np.sum((q_r.T @ reduced.b) ** 2))
    y = matops.solve_sylvester(full.a.T, reduced.a, full.c.T @ reduced.c)
    cross = float(np.trace(full.b.T @ y @ reduced.b))
    return max(0.0, full_energy + red_energy - 2.0 * cross)
