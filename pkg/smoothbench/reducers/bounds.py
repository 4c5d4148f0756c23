# File: smoothbench/reducers/bounds.py

"""Output-error bounds for balanced truncation.

`pd_bt_bounds` reports, for the prior-driven system with whitened outputs
h(t) = Γ_ε^{-1/2}·C·e^{At}·L_pr and its truncation h_r:
  * hankel_tail                  2·Σ_{k>r} σ_k
  * expected_output_error_bound  √s · hankel_tail
  * inhom_trace_bound            tr[(L̄·L̄ᵀ + 2·S̄·Ā)·Σ̄] ≥ ‖h − h_r‖²_{L2}
  * kappa_estimate               Σ_k‖h(t_k) − h_r(t_k)‖²_F / ‖h − h_r‖²_{L2}
  * measurement_bound            s · κ̂ · inhom_trace_bound
where S solves Aᵀ·S + S·A_r + C̃ᵀ·C̃_r = 0 and the barred quantities are the trailing
(r+1..k) block of the balanced coordinates at the attainable rank k.
"""

import numpy as np

from smoothbench.core import matops
from smoothbench.core.errors import DimensionError, RankError
from smoothbench.lti.systems import (
    balance_full,
    hankel_tail_bound,
    impulse_error_sq,
    observability_gramian,
    project,
    propagate,
    reachability_gramian,
    whitened_output,
)
from smoothbench.models.belief import GaussianBelief, ObservationSetup
from smoothbench.models.lti_types import BalancedBases, LtiSystem, ReducedLti
from smoothbench.models.posterior import BoundReport

# κ̂ is reported as 0 once the continuous error drops below this fraction of ‖h‖²_{L2}
_KAPPA_FLOOR = 1e-13


def pd_bt_bounds(
    sys: LtiSystem,
    prior: GaussianBelief,
    obs: ObservationSetup,
    reduced: ReducedLti,
    full_bases: BalancedBases,
) -> BoundReport:
    r, k = reduced.r, full_bases.r
    if r > k or full_bases.d != sys.d:
        raise DimensionError(f"reduced rank {r} does not fit full bases of rank {k} on d={sys.d}")
    l_pr = prior.cov_factor.factor
    s = prior.rank
    a_r = reduced.a_r
    c_w = whitened_output(sys.c, obs.noise_cov)
    c_rw = c_w @ reduced.bases.w
    b_r = reduced.bases.v.T @ l_pr

    w_bar = full_bases.w[:, r:k]
    v_bar = full_bases.v[:, r:k]
    sigma_bar = full_bases.sigma[r:k]
    l_bar = v_bar.T @ l_pr
    trace_term = (l_bar @ l_bar.T) * sigma_bar[None, :]
    if r:
        big_s = matops.solve_sylvester(sys.a.T, a_r, c_w.T @ c_rw)
        s_bar = w_bar.T @ big_s
        a_bar = reduced.bases.v.T @ sys.a @ w_bar
        trace_term = trace_term + 2.0 * (s_bar @ a_bar) * sigma_bar[None, :]
    trace_bound = max(0.0, float(np.trace(trace_term)))

    hankel = hankel_tail_bound(full_bases.sigma, r)
    full = LtiSystem(a=sys.a, c=c_w, b=l_pr)
    red = LtiSystem(a=a_r, c=c_rw, b=b_r)
    err_l2 = impulse_error_sq(full, red)
    energy = float(np.sum((observability_gramian(full).factor.T @ l_pr) ** 2))

    h = propagate(sys.a, c_w, l_pr, obs.times)
    h_r = propagate(a_r, c_rw, b_r, obs.times)
    err_discrete = float(np.sum((h - h_r) ** 2))
    kappa = err_discrete / err_l2 if err_l2 > _KAPPA_FLOOR * energy else 0.0

    return BoundReport(
        rank_r=r,
        hankel_tail=hankel,
        inhom_trace_bound=trace_bound,
        expected_output_error_bound=float(np.sqrt(s)) * hankel,
        kappa_estimate=kappa,
        measurement_bound=s * kappa * trace_bound,
        impulse_error_sq=err_l2,
        discrete_error_sq=err_discrete,
    )


def canonical_bt(sys: LtiSystem, r: int) -> tuple[ReducedLti, BalancedBases]:
    """Control-theoretic balanced truncation with the reachability/observability Gramian pair."""
    if sys.b is None:
        raise DimensionError("canonical balanced truncation needs an input operator b")
    full = balance_full(reachability_gramian(sys), observability_gramian(sys))
    if r > full.r:
        raise RankError(r, full.r)
    return project(sys, full.truncate(r)), full
