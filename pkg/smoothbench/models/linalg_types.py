# File: smoothbench/models/linalg_types.py

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from smoothbench.models.arrays import Matrix


class SymmetricFactor(BaseModel):
    """M = factor·factorᵀ, carried as its d×k square-root factor with an explicit rank.

    Build these through `matops.symmetric_factor`, which measures the rank and compresses
    redundant columns.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    factor: Matrix
    rank: int

    @model_validator(mode="after")
    def validate_rank(self) -> "SymmetricFactor":
        if self.rank < 0 or self.rank > self.factor.shape[1]:
            raise ValueError(
                f"rank {self.rank} incompatible with factor of shape {self.factor.shape}"
            )
        return self

    @property
    def dim(self) -> int:
        return int(self.factor.shape[0])

    def dense(self) -> np.ndarray:
        return self.factor @ self.factor.T


class SchurForm(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    unitary: Matrix
    quasi_triangular: Matrix

    def eigenvalues(self) -> np.ndarray:
        t = self.quasi_triangular
        n = t.shape[0]
        vals: list[complex] = []
        i = 0
        while i < n:
            if i + 1 < n and t[i + 1, i] != 0.0:
                vals.extend(complex(v) for v in np.linalg.eigvals(t[i : i + 2, i : i + 2]))
                i += 2
            else:
                vals.append(complex(t[i, i]))
                i += 1
        return np.array(vals, dtype=complex)
