# File: smoothbench/reducers/pd_bt.py

"""Prior-driven balanced truncation.

The prior factor L_pr becomes the input port of the smoothing dynamics. Balancing its
reachability Gramian against Q_ε gives a reduced system that inherits stability, with
B_r = V_rᵀ·L_pr kept for the error bounds.
"""

from typing import Optional

import numpy as np

from smoothbench.core import matops
from smoothbench.inference.smoother import build_problem
from smoothbench.models.belief import GaussianBelief, ObservationSetup, SmoothingProblem
from smoothbench.models.linalg_types import SymmetricFactor
from smoothbench.models.lti_types import LtiSystem
from smoothbench.models.posterior import BoundReport, Method, PosteriorApprox, ReducerName
from smoothbench.reducers.bounds import pd_bt_bounds
from smoothbench.reducers.lis_bt import LisBtReducer


class PdBtReducer(LisBtReducer):
    method: Method = "PdBT"

    @property
    def name(self) -> ReducerName:
        return "PdBT"

    def reachability_factor(self, problem: SmoothingProblem) -> SymmetricFactor:
        # A·P_PD + P_PD·Aᵀ = −L_pr·L_prᵀ
        return matops.solve_lyapunov(problem.system.a, problem.prior.cov_factor)

    def input_system(self, problem: SmoothingProblem) -> LtiSystem:
        return problem.system.with_input(problem.prior.cov_factor.factor)

    def bounds(self, r: int) -> Optional[BoundReport]:
        problem = self.problem
        return pd_bt_bounds(problem.system, problem.prior, problem.obs, self.reduce(r), self.full_bases)


def pd_bt_posterior(
    sys: LtiSystem, prior: GaussianBelief, obs: ObservationSetup, data: np.ndarray, r: int
) -> PosteriorApprox:
    reducer = PdBtReducer()
    reducer.prepare(build_problem(sys, prior, obs))
    return reducer.posterior(data, r)
