# File: smoothbench/inference/metrics.py

from typing import Optional

import numpy as np
from pydantic import BaseModel
from scipy import linalg as sla

from smoothbench.core import matops
from smoothbench.core.errors import DimensionError, NotSPDError
from smoothbench.inference.smoother import restrict
from smoothbench.models.belief import RestrictedProblem
from smoothbench.models.posterior import PosteriorApprox
from smoothbench.utils.rich_output import log


class RestrictedComparison(BaseModel):
    # None marks a failed comparison (restricted approximation not SPD)
    forstner: Optional[float]
    mahalanobis_sq: float


class FullspaceComparison(BaseModel):
    rel_frobenius: float
    rel_mse: float
    # set when the exact mean is zero and rel_mse holds the absolute squared error
    mse_absolute: bool = False


def forstner_distance(e: np.ndarray, f: np.ndarray) -> float:
    """sqrt(Σ ln²λᵢ) over the generalized eigenvalues of the pencil (e, f)."""
    e = np.asarray(e, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if e.shape != f.shape:
        raise DimensionError(f"cannot compare {e.shape} with {f.shape}")
    if e.size == 0:
        return 0.0
    matops.cholesky_spd(e)
    matops.cholesky_spd(f)
    lam = sla.eigh(0.5 * (e + e.T), 0.5 * (f + f.T), eigvals_only=True)
    if np.any(lam <= 0.0):
        raise NotSPDError("generalized eigenvalues of an SPD pencil came out non-positive")
    return float(np.sqrt(np.sum(np.log(lam) ** 2)))


def mahalanobis_sq(x: np.ndarray, precision_of: np.ndarray) -> float:
    """xᵀ·M^{-1}·x for the covariance M."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return 0.0
    chol = matops.cholesky_spd(precision_of)
    z = sla.solve_triangular(chol, x, lower=True)
    return float(z @ z)


def restricted_metrics(
    rp: RestrictedProblem,
    approx: PosteriorApprox,
    exact_restricted: tuple[np.ndarray, np.ndarray],
) -> RestrictedComparison:
    mean_hat, cov_hat = exact_restricted
    approx_mean, approx_cov = restrict(rp, approx)
    mahal = mahalanobis_sq(mean_hat - approx_mean, cov_hat)
    try:
        forstner: Optional[float] = forstner_distance(cov_hat, approx_cov)
    except NotSPDError as err:
        log("METRICS", f"{approx.method} r={approx.rank_r}: restricted covariance not SPD ({err})")
        forstner = None
    return RestrictedComparison(forstner=forstner, mahalanobis_sq=mahal)


def fullspace_metrics(exact: PosteriorApprox, approx: PosteriorApprox) -> FullspaceComparison:
    if exact.dim != approx.dim:
        raise DimensionError(f"posteriors have dimensions {exact.dim} and {approx.dim}")
    cov_e = exact.covariance()
    norm_e = np.linalg.norm(cov_e, "fro")
    diff = np.linalg.norm(approx.covariance() - cov_e, "fro")
    rel_frob = float(diff / norm_e) if norm_e > 0.0 else float(diff)
    err_sq = float(np.sum((approx.mean - exact.mean) ** 2))
    ref_sq = float(np.sum(exact.mean**2))
    if ref_sq == 0.0:
        return FullspaceComparison(rel_frobenius=rel_frob, rel_mse=err_sq, mse_absolute=True)
    return FullspaceComparison(rel_frobenius=rel_frob, rel_mse=err_sq / ref_sq)
