# File: smoothbench/runner/priors.py

"""Rank-deficient prior generators and the compatibility report attached to run metadata."""

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel

from smoothbench.core import matops
from smoothbench.core.errors import DimensionError
from smoothbench.inference.smoother import Seed, compatibility_residual
from smoothbench.lti.systems import reachability_gramian
from smoothbench.models.belief import GaussianBelief
from smoothbench.models.lti_types import LtiSystem
from smoothbench.utils.rich_output import log, warn

PriorKind = Literal["incompatible_empirical", "lyapunov_compatible", "from_file"]
Compatibility = Literal["strict", "semidefinite", "incompatible"]

EMPIRICAL_NORMALIZATION = "1/n after centering"
COMPATIBLE_LABEL = "invariant-subspace Lyapunov substitute"

# |residual| below this fraction of ‖A‖₂·‖Γ‖₂ counts as zero
_COMPAT_TOL = 1e-10


class PriorReport(BaseModel):
    kind: PriorKind
    rank: int
    requested_rank: Optional[int] = None
    normalization: Optional[str] = None
    label: Optional[str] = None
    compatibility_residual: float
    compatibility: Compatibility


def make_prior_incompatible(sys: LtiSystem, n_samples: int, seed: Seed) -> GaussianBelief:
    """Empirical covariance of n_samples draws from N(0, P), AP + PAᵀ = −BBᵀ."""
    if n_samples < 1:
        raise DimensionError(f"need at least one sample, got {n_samples}")
    p_factor = reachability_gramian(sys).factor
    rng = np.random.default_rng(seed)
    samples = p_factor @ rng.standard_normal((p_factor.shape[1], n_samples))
    centered = samples - samples.mean(axis=1, keepdims=True)
    prior = GaussianBelief.centered(matops.symmetric_factor(centered / np.sqrt(n_samples)))
    if prior.rank == 0:
        warn("PRIOR", f"{n_samples} sample(s) give a zero empirical covariance")
    log("PRIOR", f"empirical prior from {n_samples} samples: rank {prior.rank}")
    return prior


def make_prior_compatible(sys: LtiSystem, target_rank: int, seed: Seed) -> GaussianBelief:
    """Reachability Gramian of a random input port placed in an A-invariant subspace.

    The port lives in the span of the leading `target_rank` real Schur vectors U₁, so
    Γ = U₁·X·U₁ᵀ with T₁₁·X + X·T₁₁ᵀ = −Z·Zᵀ and A·Γ + Γ·Aᵀ = −U₁·Z·Zᵀ·U₁ᵀ ⪯ 0.
    A 2×2 Schur block is never split: the rank is raised by one instead.
    """
    d = sys.d
    if not 1 <= target_rank <= d:
        raise DimensionError(f"target rank {target_rank} outside [1, {d}]")
    schur = matops.real_schur(sys.a)
    t, u = schur.quasi_triangular, schur.unitary
    k = target_rank
    if k < d and t[k, k - 1] != 0.0:
        warn("PRIOR", f"rank {k} would split a complex-conjugate pair; using rank {k + 1}")
        k += 1
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((k, k))
    x = matops.solve_lyapunov(t[:k, :k], matops.symmetric_factor(z))
    prior = GaussianBelief.centered(matops.symmetric_factor(u[:, :k] @ x.factor))
    log("PRIOR", f"compatible substitute prior: rank {prior.rank} (target {target_rank})")
    return prior


def classify_compatibility(sys: LtiSystem, prior: GaussianBelief) -> tuple[float, Compatibility]:
    residual = compatibility_residual(sys.a, prior)
    f = prior.cov_factor.factor
    scale = float(np.linalg.norm(sys.a, 2) * np.linalg.norm(f, 2) ** 2) if f.size else 0.0
    if scale == 0.0 or abs(residual) <= _COMPAT_TOL * scale:
        return residual, "semidefinite"
    return residual, "strict" if residual < 0.0 else "incompatible"


def describe_prior(
    kind: PriorKind,
    sys: LtiSystem,
    prior: GaussianBelief,
    requested_rank: Optional[int] = None,
) -> PriorReport:
    residual, compatibility = classify_compatibility(sys, prior)
    if kind == "incompatible_empirical" and compatibility == "strict":
        warn("PRIOR", "empirical prior unexpectedly satisfies the compatibility condition")
    return PriorReport(
        kind=kind,
        rank=prior.rank,
        requested_rank=requested_rank,
        normalization=EMPIRICAL_NORMALIZATION if kind == "incompatible_empirical" else None,
        label=COMPATIBLE_LABEL if kind == "lyapunov_compatible" else None,
        compatibility_residual=residual,
        compatibility=compatibility,
    )
