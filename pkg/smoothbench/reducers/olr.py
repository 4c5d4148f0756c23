# File: smoothbench/reducers/olr.py

"""Optimal low-rank posterior updates on the likelihood-informed subspace.

The bases come from square-root balancing of the prior covariance against the Fisher
information, which stays well defined when the prior is rank-deficient.
"""

from typing import Optional

import numpy as np

from smoothbench.core.errors import RankError
from smoothbench.inference.smoother import fisher_factor, gaussian_update
from smoothbench.lti.systems import balance_full
from smoothbench.models.belief import (
    ForwardMap,
    GaussianBelief,
    ObservationSetup,
    RestrictedProblem,
    SmoothingProblem,
)
from smoothbench.models.lti_types import BalancedBases
from smoothbench.models.posterior import (
    BoundReport,
    FactoredForward,
    PosteriorApprox,
    ReducerName,
)


class OlrReducer:
    def __init__(self) -> None:
        self._prior: Optional[GaussianBelief] = None
        self._fwd: Optional[ForwardMap] = None
        self._obs: Optional[ObservationSetup] = None
        self._bases: Optional[BalancedBases] = None

    @property
    def name(self) -> ReducerName:
        return "OLR"

    @property
    def attainable_rank(self) -> int:
        return 0 if self._bases is None else self._bases.r

    def prepare(self, problem: SmoothingProblem) -> int:
        return self.prepare_from(problem.prior, problem.forward, problem.obs)

    def prepare_from(self, prior: GaussianBelief, fwd: ForwardMap, obs: ObservationSetup) -> int:
        self._prior, self._fwd, self._obs = prior, fwd, obs
        self._bases = balance_full(prior.cov_factor, fisher_factor(fwd, obs))
        return self._bases.r

    def posterior(self, data: np.ndarray, r: int) -> PosteriorApprox:
        if self._bases is None or self._prior is None or self._fwd is None or self._obs is None:
            raise RuntimeError("OlrReducer.posterior called before prepare")
        if r < 0 or r > self._bases.r:
            raise RankError(r, self._bases.r)
        bases = self._bases.truncate(r)
        prior = self._prior
        # G_OLR = G·W_r·V_rᵀ
        forward = FactoredForward(left=self._fwd.assembled @ bases.w, right=bases.v.T)
        residual = np.asarray(data, dtype=np.float64) - forward.apply(prior.mean)
        m_op = forward.left @ (forward.right @ prior.cov_factor.factor)
        shift, factor = gaussian_update(prior.cov_factor, m_op, self._obs, residual)
        return PosteriorApprox(
            method="OLR",
            rank_r=r,
            mean=prior.mean + shift,
            cov_factor=factor,
            forward=forward,
            diagnostics={
                "sigma_tail": float(np.sum(self._bases.sigma[r:])),
                "attainable_rank": float(self._bases.r),
            },
        )

    def bounds(self, r: int) -> Optional[BoundReport]:
        return None


def olr_posterior(
    prior: GaussianBelief, fwd: ForwardMap, obs: ObservationSetup, data: np.ndarray, r: int
) -> PosteriorApprox:
    reducer = OlrReducer()
    reducer.prepare_from(prior, fwd, obs)
    return reducer.posterior(data, r)


def restricted_olr_forstner_sq(sigma: np.ndarray, r: int) -> float:
    """Closed-form squared restricted Förstner loss of OLR at rank r: Σ_{i>r} ln²(1/(1+σᵢ²))."""
    tail = np.asarray(sigma, dtype=np.float64)[r:]
    return float(np.sum(np.log1p(tail**2) ** 2))


def random_update_competitor(
    rp: RestrictedProblem, r: int, rng: np.random.Generator
) -> np.ndarray:
    """A random SPD member of {Σ − K·Kᵀ : rank K ≤ r} in the restricted coordinates.

    Written as Σ^{1/2}·(I − U·diag(c)·Uᵀ)·Σ^{1/2} with U orthonormal and c in (0, 1).
    U is a random tilt of the leading coordinate directions and c a perturbation of the
    optimal shrinkage, so competitors land near the optimum rather than far from it.
    """
    s = rp.s
    if r < 0 or r > s:
        raise RankError(r, s)
    sigma = rp.prior_diag
    if r == 0:
        return np.diag(sigma)
    lead = np.eye(s)[:, :r]
    tilt = rng.uniform(0.0, 1.0)
    u, _ = np.linalg.qr(lead + tilt * rng.standard_normal((s, r)))
    optimal = sigma[:r] ** 2 / (1.0 + sigma[:r] ** 2)
    c = np.clip(optimal * (1.0 + 0.5 * rng.standard_normal(r)), 1e-6, 1.0 - 1e-12)
    inner = np.eye(s) - (u * c) @ u.T
    root = np.sqrt(sigma)
    return root[:, None] * inner * root[None, :]
