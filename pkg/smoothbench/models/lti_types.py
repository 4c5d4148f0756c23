# File: smoothbench/models/lti_types.py

from functools import cached_property
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from smoothbench.core import matops
from smoothbench.core.errors import StabilityError
from smoothbench.models.arrays import Matrix, Vector


class LtiSystem(BaseModel):
    """ẋ = a·x + b·u, y = c·x. With `b` absent this is the unforced smoothing system."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    a: Matrix
    c: Matrix
    b: Optional[Matrix] = None

    @model_validator(mode="after")
    def validate_dimensions(self) -> "LtiSystem":
        d = self.a.shape[0]
        if self.a.shape != (d, d):
            raise ValueError(f"a must be square, got {self.a.shape}")
        if self.c.shape[1] != d:
            raise ValueError(f"c has {self.c.shape[1]} columns, state dimension is {d}")
        if self.b is not None and self.b.shape[0] != d:
            raise ValueError(f"b has {self.b.shape[0]} rows, state dimension is {d}")
        return self

    @property
    def d(self) -> int:
        return int(self.a.shape[0])

    @property
    def d_out(self) -> int:
        return int(self.c.shape[0])

    @property
    def d_in(self) -> int:
        return 0 if self.b is None else int(self.b.shape[1])

    @cached_property
    def stable(self) -> bool:
        try:
            matops.check_stable(self.a)
        except StabilityError:
            return False
        return True

    def unforced(self) -> "LtiSystem":
        return LtiSystem(a=self.a, c=self.c)

    def with_input(self, b: np.ndarray) -> "LtiSystem":
        return LtiSystem(a=self.a, c=self.c, b=b)


class BalancedBases(BaseModel):
    """Trial basis w, test basis v (vᵀw = I_r) and the generalized singular values."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    w: Matrix
    v: Matrix
    sigma: Vector

    @model_validator(mode="after")
    def validate_bases(self) -> "BalancedBases":
        r = self.sigma.shape[0]
        if self.w.shape != self.v.shape or self.w.shape[1] != r:
            raise ValueError(
                f"w{self.w.shape}, v{self.v.shape} and sigma({r}) are not dimensioned alike"
            )
        if r and (np.any(self.sigma <= 0.0) or np.any(np.diff(self.sigma) > 0.0)):
            raise ValueError("sigma must be strictly positive and non-increasing")
        return self

    @property
    def r(self) -> int:
        return int(self.sigma.shape[0])

    @property
    def d(self) -> int:
        return int(self.w.shape[0])

    def truncate(self, r: int) -> "BalancedBases":
        if r > self.r:
            raise ValueError(f"cannot truncate {self.r} bases to {r}")
        return BalancedBases(w=self.w[:, :r], v=self.v[:, :r], sigma=self.sigma[:r])

    def projector(self) -> np.ndarray:
        return self.w @ self.v.T


class ReducedLti(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    a_r: Matrix
    c_r: Matrix
    b_r: Optional[Matrix] = None
    bases: BalancedBases

    @property
    def r(self) -> int:
        return int(self.a_r.shape[0])

    def as_system(self) -> LtiSystem:
        return LtiSystem(a=self.a_r, c=self.c_r, b=self.b_r)
