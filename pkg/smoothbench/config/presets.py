# File: smoothbench/config/presets.py

from typing import Callable, Dict

from smoothbench.config import settings
from smoothbench.core.errors import ConfigError
from smoothbench.models.experiment_config import (
    CompatiblePrior,
    ExperimentConfig,
    FileSystem,
    IncompatiblePrior,
    SyntheticSystem,
    TimeGrid,
)


def _iss1r() -> ExperimentConfig:
    # ISS1R benchmark: measurements every 0.1 up to t = 8, empirical prior from 90 samples
    return ExperimentConfig(
        system=FileSystem(directory=settings.ISS_DIR),
        prior=IncompatiblePrior(samples=90),
        times=TimeGrid(t_step=0.1, t_end=8.0),
        noise_diag=[0.0025, 0.0005, 0.0005],
        ranks=list(range(5, 90, 5)),
        replicates=100,
        seed=0,
    )


def _toy() -> ExperimentConfig:
    return ExperimentConfig(
        system=SyntheticSystem(d=8, d_out=2, spread=5.0, seed=0),
        prior=IncompatiblePrior(samples=6),
        times=TimeGrid(t_step=0.1, t_end=4.0),
        noise_diag=[0.05, 0.05],
        ranks=[1, 2, 3, 4, 5],
        replicates=20,
        seed=0,
    )


def _toy_compatible() -> ExperimentConfig:
    cfg = _toy()
    # even d gives an all-complex spectrum, so an odd target would be raised by one
    return cfg.model_copy(update={"prior": CompatiblePrior(target_rank=6)})


def _desk() -> ExperimentConfig:
    return ExperimentConfig(
        system=SyntheticSystem(d=60, d_out=3, spread=20.0, seed=1),
        prior=IncompatiblePrior(samples=21),
        times=TimeGrid(t_step=0.1, t_end=8.0),
        noise_diag=[0.01, 0.01, 0.01],
        ranks=list(range(2, 21, 2)),
        replicates=30,
        seed=0,
    )


def _desk_compatible() -> ExperimentConfig:
    cfg = _desk()
    return cfg.model_copy(
        update={"prior": CompatiblePrior(target_rank=40), "ranks": list(range(4, 41, 4))}
    )


PRESETS: Dict[str, Callable[[], ExperimentConfig]] = {
    "paper-iss1r": _iss1r,
    "iss1r": _iss1r,
    "toy": _toy,
    "toy-compatible": _toy_compatible,
    "desk": _desk,
    "desk-compatible": _desk_compatible,
}


def get_preset(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset '{name}' (available: {', '.join(PRESETS)})") from None
