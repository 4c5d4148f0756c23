# File: smoothbench/models/belief.py

from functools import cached_property
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import linalg as sla

from smoothbench.core import matops
from smoothbench.core.errors import TimeGridError
from smoothbench.models.arrays import Matrix, Tensor3, Vector
from smoothbench.models.linalg_types import SymmetricFactor
from smoothbench.models.lti_types import BalancedBases, LtiSystem


class GaussianBelief(BaseModel):
    """N(mean, F·Fᵀ) with F = cov_factor.factor."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mean: Vector
    cov_factor: SymmetricFactor

    @model_validator(mode="after")
    def validate_dimensions(self) -> "GaussianBelief":
        if self.mean.shape[0] != self.cov_factor.dim:
            raise ValueError(
                f"mean has length {self.mean.shape[0]}, covariance factor has {self.cov_factor.dim} rows"
            )
        return self

    @classmethod
    def centered(cls, cov_factor: SymmetricFactor) -> "GaussianBelief":
        return cls(mean=np.zeros(cov_factor.dim), cov_factor=cov_factor)

    @property
    def dim(self) -> int:
        return self.cov_factor.dim

    @property
    def rank(self) -> int:
        return self.cov_factor.rank

    def covariance(self) -> np.ndarray:
        return self.cov_factor.dense()


def check_times(times: np.ndarray) -> np.ndarray:
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or times.size == 0:
        raise TimeGridError(f"times must be a non-empty 1-d sequence, got shape {times.shape}")
    if times[0] <= 0.0:
        raise TimeGridError(f"first observation time must be positive, got {times[0]}")
    if np.any(np.diff(times) <= 0.0):
        k = int(np.argmax(np.diff(times) <= 0.0))
        raise TimeGridError(f"times not strictly increasing at index {k + 1}: {times[k]} → {times[k + 1]}")
    return times


class ObservationSetup(BaseModel):
    """Measurement times and the per-time noise covariance Γ_ε.

    The stacked noise covariance blkdiag(Γ_ε, …, Γ_ε) is only ever applied through `whiten`.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    times: Vector
    noise_cov: Matrix

    @model_validator(mode="after")
    def validate_setup(self) -> "ObservationSetup":
        check_times(self.times)
        # raises NotSPDError, which is not a ValueError and so escapes pydantic untouched
        matops.cholesky_spd(self.noise_cov)
        return self

    @classmethod
    def from_noise_std(cls, times: Sequence[float], noise_std: Sequence[float]) -> "ObservationSetup":
        std = np.asarray(noise_std, dtype=np.float64)
        return cls(times=np.asarray(times, dtype=np.float64), noise_cov=np.diag(std**2))

    @classmethod
    def equidistant(cls, t_step: float, t_end: float, noise_std: Sequence[float]) -> "ObservationSetup":
        n = int(round(t_end / t_step))
        return cls.from_noise_std(t_step * np.arange(1, n + 1), noise_std)

    @property
    def n(self) -> int:
        return int(self.times.shape[0])

    @property
    def d_out(self) -> int:
        return int(self.noise_cov.shape[0])

    @property
    def n_obs(self) -> int:
        return self.n * self.d_out

    @cached_property
    def noise_chol(self) -> np.ndarray:
        return matops.cholesky_spd(self.noise_cov)

    def whiten(self, y: np.ndarray) -> np.ndarray:
        """Apply Γ_obs^{-1/2} to stacked data: a length n·d_out vector or an (n·d_out × k) matrix."""
        y = np.asarray(y, dtype=np.float64)
        vector = y.ndim == 1
        k = 1 if vector else y.shape[1]
        cols = y.reshape(self.n, self.d_out, k)
        flat = cols.transpose(1, 0, 2).reshape(self.d_out, self.n * k)
        z = sla.solve_triangular(self.noise_chol, flat, lower=True)
        out = z.reshape(self.d_out, self.n, k).transpose(1, 0, 2).reshape(self.n_obs, k)
        return out[:, 0] if vector else out


class ForwardMap(BaseModel):
    """G = [C·e^{A t₁}; …; C·e^{A t_n}], kept as an (n, d_out, d) stack of blocks."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    blocks: Tensor3

    @property
    def n(self) -> int:
        return int(self.blocks.shape[0])

    @property
    def d(self) -> int:
        return int(self.blocks.shape[2])

    @property
    def assembled(self) -> np.ndarray:
        n, d_out, d = self.blocks.shape
        return self.blocks.reshape(n * d_out, d)

    def apply(self, p: np.ndarray) -> np.ndarray:
        return self.assembled @ p


class RestrictedProblem(BaseModel):
    """The s-dimensional problem on Ran(Γ_pr): forward Ĝ = G·W_s, prior diag(σ)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    g_hat: Matrix
    prior_diag: Vector
    bases: BalancedBases
    requested_rank: int

    @model_validator(mode="after")
    def validate_restriction(self) -> "RestrictedProblem":
        if self.g_hat.shape[1] != self.bases.r:
            raise ValueError(f"g_hat has {self.g_hat.shape[1]} columns, bases have rank {self.bases.r}")
        if not np.array_equal(self.prior_diag, self.bases.sigma):
            raise ValueError("restricted prior must equal the generalized singular values")
        return self

    @property
    def s(self) -> int:
        return self.bases.r

    @property
    def collapsed(self) -> bool:
        return self.s < self.requested_rank


class SmoothingProblem(BaseModel):
    """Everything a reducer needs that does not change between replicates."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    system: LtiSystem
    prior: GaussianBelief
    obs: ObservationSetup
    forward: ForwardMap

    @model_validator(mode="after")
    def validate_problem(self) -> "SmoothingProblem":
        if self.system.d != self.prior.dim or self.forward.d != self.prior.dim:
            raise ValueError("system, prior and forward map disagree on the state dimension")
        if self.system.d_out != self.obs.d_out or self.forward.n != self.obs.n:
            raise ValueError("observation setup does not match the system output or forward map")
        return self
