# File: smoothbench/inference/smoother.py

"""Linear Gaussian smoothing: forward maps, exact and restricted posteriors, data generation."""

from typing import Optional, Union

import numpy as np

from smoothbench.core import matops
from smoothbench.core.errors import DimensionError
from smoothbench.lti.systems import balance_full, propagate
from smoothbench.models.belief import (
    ForwardMap,
    GaussianBelief,
    ObservationSetup,
    RestrictedProblem,
    SmoothingProblem,
)
from smoothbench.models.linalg_types import SymmetricFactor
from smoothbench.models.lti_types import LtiSystem
from smoothbench.models.posterior import PosteriorApprox
from smoothbench.utils.rich_output import warn

Seed = Union[int, np.random.SeedSequence, np.random.Generator]


def assemble_forward(sys: LtiSystem, obs: ObservationSetup) -> ForwardMap:
    if sys.b is not None:
        raise DimensionError("the smoothing forward map is defined for the unforced system")
    if sys.d_out != obs.d_out:
        raise DimensionError(f"system has {sys.d_out} outputs, noise covariance is {obs.d_out}×{obs.d_out}")
    return ForwardMap(blocks=propagate(sys.a, sys.c, np.eye(sys.d), obs.times))


def build_problem(sys: LtiSystem, prior: GaussianBelief, obs: ObservationSetup) -> SmoothingProblem:
    unforced = sys.unforced()
    return SmoothingProblem(
        system=unforced, prior=prior, obs=obs, forward=assemble_forward(unforced, obs)
    )


def fisher_factor(fwd: ForwardMap, obs: ObservationSetup) -> SymmetricFactor:
    """R with R·Rᵀ = Gᵀ·Γ_obs^{-1}·G."""
    return matops.symmetric_factor(obs.whiten(fwd.assembled).T)


def gaussian_update(
    cov_factor: SymmetricFactor, m_op: np.ndarray, obs: ObservationSetup, residual: np.ndarray
) -> tuple[np.ndarray, SymmetricFactor]:
    """Condition N(0, L·Lᵀ) on data through the operator M = G̃·L.

    Works in whitened coordinates M̃ = Γ_obs^{-1/2}·M with the thin SVD M̃ = U·diag(μ)·Vᵀ:
      L·(I − Mᵀ(Γ_obs + MMᵀ)^{-1}M)·Lᵀ = (L·K)(L·K)ᵀ,  K = I + V·diag(1/√(1+μ²) − 1)·Vᵀ
      mean = L·V·diag(μ/(1+μ²))·Uᵀ·m̃
    K is the symmetric square root of the downdate, so the result stays PSD.
    """
    l = cov_factor.factor
    if m_op.shape[1] != l.shape[1]:
        raise DimensionError(f"operator has {m_op.shape[1]} columns, prior factor has {l.shape[1]}")
    if m_op.shape[0] != obs.n_obs or residual.shape[0] != obs.n_obs:
        raise DimensionError(f"operator/data rows do not match {obs.n_obs} observations")
    m_white = obs.whiten(m_op)
    u, mu, vt = matops.svd(m_white)
    v = vt.T
    shrink = 1.0 / np.sqrt(1.0 + mu**2) - 1.0
    k = np.eye(l.shape[1]) + (v * shrink) @ v.T
    gain = (v * (mu / (1.0 + mu**2))) @ (u.T @ obs.whiten(residual))
    return l @ gain, SymmetricFactor(factor=l @ k, rank=cov_factor.rank)


def exact_posterior(
    prior: GaussianBelief, fwd: ForwardMap, obs: ObservationSetup, data: np.ndarray
) -> PosteriorApprox:
    g = fwd.assembled
    if g.shape[1] != prior.dim:
        raise DimensionError(f"forward map acts on {g.shape[1]} states, prior has {prior.dim}")
    residual = np.asarray(data, dtype=np.float64) - g @ prior.mean
    shift, factor = gaussian_update(prior.cov_factor, g @ prior.cov_factor.factor, obs, residual)
    return PosteriorApprox(
        method="Exact", rank_r=prior.rank, mean=prior.mean + shift, cov_factor=factor
    )


def build_restricted(
    prior: GaussianBelief, fwd: ForwardMap, obs: ObservationSetup
) -> RestrictedProblem:
    """Project onto Ran(Γ_pr) with the balancing bases of (Γ_pr, Gᵀ·Γ_obs^{-1}·G)."""
    bases = balance_full(prior.cov_factor, fisher_factor(fwd, obs))
    if bases.r < prior.rank:
        warn(
            "RESTRICT",
            f"Fisher information only sees {bases.r} of the {prior.rank} prior directions; "
            f"restricting to s = {bases.r}",
        )
    return RestrictedProblem(
        g_hat=fwd.assembled @ bases.w,
        prior_diag=bases.sigma,
        bases=bases,
        requested_rank=prior.rank,
    )


def restricted_posterior(
    rp: RestrictedProblem, obs: ObservationSetup, data: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior of the restricted problem in ℝ^s.

    Restricted prior and Fisher information are both diag(σ), so the covariance is
    diag(σ/(1+σ²)).
    """
    sigma = rp.prior_diag
    cov_diag = sigma / (1.0 + sigma**2)
    mean = cov_diag * (obs.whiten(rp.g_hat).T @ obs.whiten(data))
    return mean, np.diag(cov_diag)


def lift_restricted(rp: RestrictedProblem, mean_hat: np.ndarray, cov_hat: np.ndarray) -> PosteriorApprox:
    """W_s·μ̂ and W_s·Γ̂·W_sᵀ back in the full state space."""
    mean_hat = np.asarray(mean_hat, dtype=np.float64)
    cov_hat = np.asarray(cov_hat, dtype=np.float64)
    if mean_hat.shape != (rp.s,) or cov_hat.shape != (rp.s, rp.s):
        raise DimensionError(f"restricted statistics must have dimension {rp.s}")
    w = rp.bases.w
    inner = matops.factor_psd(cov_hat) if rp.s else SymmetricFactor(factor=np.zeros((0, 0)), rank=0)
    return PosteriorApprox(
        method="Exact",
        rank_r=rp.s,
        mean=w @ mean_hat,
        cov_factor=SymmetricFactor(factor=w @ inner.factor, rank=inner.rank),
    )


def restrict(rp: RestrictedProblem, approx: PosteriorApprox) -> tuple[np.ndarray, np.ndarray]:
    """V_sᵀ·μ and V_sᵀ·Γ·V_s."""
    v = rp.bases.v
    f = v.T @ approx.cov_factor.factor
    return v.T @ approx.mean, f @ f.T


def sample_prior(prior: GaussianBelief, rng_seed: Seed) -> np.ndarray:
    rng = np.random.default_rng(rng_seed)
    z = rng.standard_normal(prior.cov_factor.factor.shape[1])
    return prior.mean + prior.cov_factor.factor @ z


def noise_free_outputs(sys: LtiSystem, obs: ObservationSetup, truth: np.ndarray) -> np.ndarray:
    return propagate(sys.a, sys.c, np.asarray(truth, dtype=np.float64), obs.times).reshape(obs.n_obs)


def generate_data(
    sys: LtiSystem,
    obs: ObservationSetup,
    truth: np.ndarray,
    rng_seed: Seed,
    noise_free: bool = False,
) -> np.ndarray:
    y = noise_free_outputs(sys, obs, truth)
    if noise_free:
        return y
    rng = np.random.default_rng(rng_seed)
    eps = obs.noise_chol @ rng.standard_normal((obs.d_out, obs.n))
    return y + eps.T.reshape(obs.n_obs)


def compatibility_residual(a: np.ndarray, prior: GaussianBelief) -> float:
    """Largest eigenvalue of A·Γ + Γ·Aᵀ; a prior is compatible when this is negative."""
    f = prior.cov_factor.factor
    af = np.asarray(a, dtype=np.float64) @ f
    sym = af @ f.T
    vals, _ = matops.sym_eig(sym + sym.T)
    return float(vals[0]) if vals.size else 0.0


def output_error_sq(
    fwd: ForwardMap, approx: PosteriorApprox, obs: ObservationSetup, truth: np.ndarray
) -> Optional[float]:
    """‖(G − G̃)·p‖² in the Γ_obs^{-1} norm; None when the approximation carries no operator."""
    if approx.forward is None:
        return None if approx.method != "Exact" else 0.0
    diff = fwd.apply(truth) - approx.forward.apply(truth)
    return float(np.sum(obs.whiten(diff) ** 2))
