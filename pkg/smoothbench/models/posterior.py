# File: smoothbench/models/posterior.py

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from smoothbench.models.arrays import Matrix, Vector
from smoothbench.models.linalg_types import SymmetricFactor

Method = Literal["Exact", "OLR", "LisBT", "PdBT"]
ReducerName = Literal["OLR", "LisBT", "PdBT"]


class FactoredForward(BaseModel):
    """Approximate forward operator G̃ = left·right, never assembled."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    left: Matrix
    right: Matrix

    @model_validator(mode="after")
    def validate_inner(self) -> "FactoredForward":
        if self.left.shape[1] != self.right.shape[0]:
            raise ValueError(f"inner dimensions differ: {self.left.shape} · {self.right.shape}")
        return self

    def apply(self, p: np.ndarray) -> np.ndarray:
        return self.left @ (self.right @ p)

    def dense(self) -> np.ndarray:
        return self.left @ self.right


class PosteriorApprox(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    method: Method
    rank_r: int = Field(ge=0)
    mean: Vector
    cov_factor: SymmetricFactor
    diagnostics: dict[str, float] = Field(default_factory=dict)
    # None for the exact posterior, whose forward operator is G itself
    forward: Optional[FactoredForward] = None

    @model_validator(mode="after")
    def validate_dimensions(self) -> "PosteriorApprox":
        if self.mean.shape[0] != self.cov_factor.dim:
            raise ValueError("mean and covariance factor disagree on the dimension")
        return self

    @property
    def dim(self) -> int:
        return self.cov_factor.dim

    def covariance(self) -> np.ndarray:
        return self.cov_factor.dense()


class BoundReport(BaseModel):
    """PD-BT output-error bounds at one truncation rank."""

    rank_r: int = Field(ge=0)
    hankel_tail: float = Field(ge=0.0)
    inhom_trace_bound: float = Field(ge=0.0)
    expected_output_error_bound: float = Field(ge=0.0)
    kappa_estimate: float = Field(ge=0.0)
    measurement_bound: float = Field(ge=0.0)
    # exact ‖h − h_r‖²_{L2} through Gramians; the trace bound must dominate it
    impulse_error_sq: float = Field(ge=0.0)
    discrete_error_sq: float = Field(ge=0.0)
