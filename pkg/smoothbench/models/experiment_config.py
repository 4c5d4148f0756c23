# File: smoothbench/models/experiment_config.py

from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

from smoothbench.models.posterior import ReducerName


class SyntheticSystem(BaseModel):
    kind: Literal["synthetic"] = "synthetic"
    d: int = Field(ge=2)
    d_out: int = Field(default=3, ge=1)
    spread: float = Field(default=10.0, gt=0.1)
    seed: int = Field(default=0, ge=0)


class FileSystem(BaseModel):
    kind: Literal["files"] = "files"
    # holds A.mtx, C.mtx and (for empirical priors) B.mtx
    directory: Path


SystemSource = Annotated[Union[SyntheticSystem, FileSystem], Field(discriminator="kind")]


class IncompatiblePrior(BaseModel):
    kind: Literal["incompatible_empirical"] = "incompatible_empirical"
    samples: int = Field(default=90, ge=1)


class CompatiblePrior(BaseModel):
    kind: Literal["lyapunov_compatible"] = "lyapunov_compatible"
    target_rank: int = Field(ge=1)


class FilePrior(BaseModel):
    kind: Literal["from_file"] = "from_file"
    path: Path


PriorSource = Annotated[
    Union[IncompatiblePrior, CompatiblePrior, FilePrior], Field(discriminator="kind")
]


class TimeGrid(BaseModel):
    # observations at t_step, 2·t_step, …, t_end
    t_step: float = Field(default=0.1, gt=0.0)
    t_end: float = Field(default=8.0, gt=0.0)

    @model_validator(mode="after")
    def validate_grid(self) -> "TimeGrid":
        if self.t_end < self.t_step:
            raise ValueError(f"t_end={self.t_end} precedes the first observation at {self.t_step}")
        return self


class ExperimentConfig(BaseModel):
    system: SystemSource
    prior: PriorSource
    times: TimeGrid = Field(default_factory=TimeGrid)
    # per-output noise standard deviations; Γ_ε = diag(noise_diag²)
    noise_diag: List[float]
    ranks: List[int]
    replicates: int = Field(default=100, ge=1)
    seed: int = Field(default=0, ge=0)
    methods: List[ReducerName] = Field(default_factory=lambda: ["OLR", "LisBT", "PdBT"])
    truth: Optional[Path] = None
    noise_free: bool = False

    @model_validator(mode="after")
    def validate_experiment(self) -> "ExperimentConfig":
        if not self.noise_diag or any(v <= 0.0 for v in self.noise_diag):
            raise ValueError("noise_diag entries must be strictly positive")
        if any(r < 0 for r in self.ranks):
            raise ValueError("ranks must be non-negative")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("methods must not repeat")
        if isinstance(self.system, SyntheticSystem):
            if any(r > self.system.d for r in self.ranks):
                raise ValueError(f"ranks must lie within [0, d={self.system.d}]")
            if len(self.noise_diag) != self.system.d_out:
                raise ValueError(
                    f"noise_diag has {len(self.noise_diag)} entries, system has {self.system.d_out} outputs"
                )
        return self
