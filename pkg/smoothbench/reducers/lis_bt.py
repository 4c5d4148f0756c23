# File: smoothbench/reducers/lis_bt.py

"""Likelihood-informed balanced truncation.

Balances the prior covariance against the noise-weighted observability Gramian and
evaluates the approximate forward map by evolving only the reduced system.
"""

from typing import Optional

import numpy as np

from smoothbench.core.errors import RankError
from smoothbench.inference.smoother import build_problem, gaussian_update
from smoothbench.lti.systems import balance_full, observability_gramian_weighted, project, propagate
from smoothbench.models.belief import GaussianBelief, ObservationSetup, SmoothingProblem
from smoothbench.models.linalg_types import SymmetricFactor
from smoothbench.models.lti_types import BalancedBases, LtiSystem, ReducedLti
from smoothbench.models.posterior import (
    BoundReport,
    FactoredForward,
    Method,
    PosteriorApprox,
    ReducerName,
)
from smoothbench.utils.rich_output import log


class LisBtReducer:
    method: Method = "LisBT"

    def __init__(self) -> None:
        self._problem: Optional[SmoothingProblem] = None
        self._bases: Optional[BalancedBases] = None

    @property
    def name(self) -> ReducerName:
        return "LisBT"

    @property
    def attainable_rank(self) -> int:
        return 0 if self._bases is None else self._bases.r

    @property
    def full_bases(self) -> BalancedBases:
        if self._bases is None:
            raise RuntimeError(f"{self.name} reducer used before prepare")
        return self._bases

    @property
    def problem(self) -> SmoothingProblem:
        if self._problem is None:
            raise RuntimeError(f"{self.name} reducer used before prepare")
        return self._problem

    def reachability_factor(self, problem: SmoothingProblem) -> SymmetricFactor:
        return problem.prior.cov_factor

    def input_system(self, problem: SmoothingProblem) -> LtiSystem:
        return problem.system.unforced()

    def prepare(self, problem: SmoothingProblem) -> int:
        self._problem = problem
        q_eps = observability_gramian_weighted(problem.system, problem.obs.noise_cov)
        self._bases = balance_full(self.reachability_factor(problem), q_eps)
        log("REDUCE", f"{self.name}: attainable rank {self._bases.r} (Q_ε rank {q_eps.rank})")
        return self._bases.r

    def reduce(self, r: int) -> ReducedLti:
        bases = self.full_bases
        if r < 0 or r > bases.r:
            raise RankError(r, bases.r)
        return project(self.input_system(self.problem), bases.truncate(r))

    def posterior(self, data: np.ndarray, r: int) -> PosteriorApprox:
        problem = self.problem
        reduced = self.reduce(r)
        return reduced_posterior(
            self.method, reduced, problem.prior, problem.obs, data, self.full_bases
        )

    def bounds(self, r: int) -> Optional[BoundReport]:
        return None


def reduced_forward(reduced: ReducedLti, obs: ObservationSetup) -> FactoredForward:
    """[C_r·e^{A_r·t_k}]·V_rᵀ, stepping the r×r system only."""
    h = propagate(reduced.a_r, reduced.c_r, np.eye(reduced.r), obs.times)
    return FactoredForward(left=h.reshape(obs.n_obs, reduced.r), right=reduced.bases.v.T)


def reduced_posterior(
    method: Method,
    reduced: ReducedLti,
    prior: GaussianBelief,
    obs: ObservationSetup,
    data: np.ndarray,
    full_bases: BalancedBases,
) -> PosteriorApprox:
    forward = reduced_forward(reduced, obs)
    residual = np.asarray(data, dtype=np.float64) - forward.apply(prior.mean)
    m_op = forward.left @ (forward.right @ prior.cov_factor.factor)
    shift, factor = gaussian_update(prior.cov_factor, m_op, obs, residual)
    diagnostics = {
        "sigma_tail": float(np.sum(full_bases.sigma[reduced.r :])),
        "attainable_rank": float(full_bases.r),
    }
    if reduced.r:
        diagnostics["reduced_max_real_eig"] = float(np.max(np.linalg.eigvals(reduced.a_r).real))
    return PosteriorApprox(
        method=method,
        rank_r=reduced.r,
        mean=prior.mean + shift,
        cov_factor=factor,
        forward=forward,
        diagnostics=diagnostics,
    )


def lis_bt_posterior(
    sys: LtiSystem, prior: GaussianBelief, obs: ObservationSetup, data: np.ndarray, r: int
) -> PosteriorApprox:
    reducer = LisBtReducer()
    reducer.prepare(build_problem(sys, prior, obs))
    return reducer.posterior(data, r)
