# File: smoothbench/runner/experiment.py

"""The benchmark protocol: per replicate draw a truth, simulate noisy data, compute the exact
posterior once and every (method, rank) approximation, and score them.

Replicates run on worker threads; rows are merged back in (replicate, method, rank) order so
the output does not depend on scheduling.
"""

import asyncio
import math
import time
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel

from smoothbench import __version__
from smoothbench.config import settings
from smoothbench.core.errors import ConfigError
from smoothbench.inference.metrics import fullspace_metrics, restricted_metrics
from smoothbench.inference.smoother import (
    build_problem,
    build_restricted,
    exact_posterior,
    generate_data,
    output_error_sq,
    restricted_posterior,
    sample_prior,
)
from smoothbench.models.belief import GaussianBelief, ObservationSetup, RestrictedProblem, SmoothingProblem
from smoothbench.models.experiment_config import (
    CompatiblePrior,
    ExperimentConfig,
    FilePrior,
    IncompatiblePrior,
    SyntheticSystem,
)
from smoothbench.models.lti_types import LtiSystem
from smoothbench.models.posterior import BoundReport, PosteriorApprox
from smoothbench.models.result_row import CSV_COLUMNS, CellStatus, ResultRow
from smoothbench.reducers.registry import ReducerRegistry, default_registry
from smoothbench.runner.cell_executor import CellExecutor
from smoothbench.runner.matrix_market import load_prior, load_system, load_vector
from smoothbench.runner.priors import (
    PriorReport,
    describe_prior,
    make_prior_compatible,
    make_prior_incompatible,
)
from smoothbench.runner.synth import synth_system
from smoothbench.utils.rich_output import log, warn


class RunMetadata(BaseModel):
    version: str = __version__
    seed: int
    d: int
    d_out: int
    n_times: int
    replicates: int
    noise_free: bool
    fixed_truth: bool
    restricted_rank: int
    prior: PriorReport
    attainable_ranks: Dict[str, int]
    config: dict[str, object]


class CellMetrics(BaseModel):
    restricted_forstner: Optional[float]
    restricted_mahalanobis_sq: float
    rel_frobenius: float
    rel_mse: float
    output_error_sq: Optional[float]


class ExperimentSetup:
    """Everything shared by all replicates. Read-only once built."""

    def __init__(
        self,
        cfg: ExperimentConfig,
        problem: SmoothingProblem,
        restricted: RestrictedProblem,
        registry: ReducerRegistry,
        bounds: Dict[Tuple[str, int], Tuple[Optional[BoundReport], CellStatus]],
        truth: Optional[np.ndarray],
        metadata: RunMetadata,
    ) -> None:
        self.cfg = cfg
        self.problem = problem
        self.restricted = restricted
        self.registry = registry
        self.bounds = bounds
        self.truth = truth
        self.metadata = metadata


def load_experiment_system(cfg: ExperimentConfig) -> LtiSystem:
    src = cfg.system
    if isinstance(src, SyntheticSystem):
        return synth_system(src.d, src.d_out, src.spread, src.seed)
    return load_system(src.directory, require_b=isinstance(cfg.prior, IncompatiblePrior))


def make_experiment_prior(
    cfg: ExperimentConfig, system: LtiSystem
) -> Tuple[GaussianBelief, PriorReport]:
    spec = cfg.prior
    # the prior gets its own stream so changing replicates never changes the prior
    prior_seed = np.random.SeedSequence([cfg.seed, 0x5EED])
    if isinstance(spec, IncompatiblePrior):
        prior = make_prior_incompatible(system, spec.samples, prior_seed)
        return prior, describe_prior(spec.kind, system, prior, requested_rank=spec.samples - 1)
    if isinstance(spec, CompatiblePrior):
        prior = make_prior_compatible(system, spec.target_rank, prior_seed)
        return prior, describe_prior(spec.kind, system, prior, requested_rank=spec.target_rank)
    assert isinstance(spec, FilePrior)
    prior = load_prior(spec.path)
    return prior, describe_prior(spec.kind, system, prior)


def build_setup(cfg: ExperimentConfig) -> ExperimentSetup:
    system = load_experiment_system(cfg)
    if len(cfg.noise_diag) != system.d_out:
        raise ConfigError(f"noise_diag has {len(cfg.noise_diag)} entries, system has {system.d_out} outputs")
    if any(r > system.d for r in cfg.ranks):
        raise ConfigError(f"ranks must lie within [0, d={system.d}]")
    prior, prior_report = make_experiment_prior(cfg, system)
    if prior.dim != system.d:
        raise ConfigError(f"prior has dimension {prior.dim}, system has {system.d}")
    obs = ObservationSetup.equidistant(cfg.times.t_step, cfg.times.t_end, cfg.noise_diag)
    obs.noise_chol  # noqa: B018 - warm the cache before worker threads share it

    problem = build_problem(system, prior, obs)
    restricted = build_restricted(prior, problem.forward, obs)
    registry = default_registry(cfg.methods)
    attainable = registry.prepare_all(problem)

    bounds: Dict[Tuple[str, int], Tuple[Optional[BoundReport], CellStatus]] = {}
    for name in registry.names():
        reducer = registry.get(name)
        for r in cfg.ranks:
            executor: CellExecutor[Optional[BoundReport]] = CellExecutor(f"bounds {name} r={r}")
            report, status = executor.execute(lambda: reducer.bounds(r))
            bounds[(name, r)] = (report, status)

    truth = None
    if cfg.truth is not None:
        truth = load_vector(cfg.truth)
        if truth.shape[0] != system.d:
            raise ConfigError(f"truth has length {truth.shape[0]}, system has {system.d} states")

    metadata = RunMetadata(
        seed=cfg.seed,
        d=system.d,
        d_out=system.d_out,
        n_times=obs.n,
        replicates=cfg.replicates,
        noise_free=cfg.noise_free,
        fixed_truth=truth is not None,
        restricted_rank=restricted.s,
        prior=prior_report,
        attainable_ranks=attainable,
        config=cfg.model_dump(mode="json"),
    )
    log(
        "RUN",
        f"setup ready: d={system.d}, s={prior.rank}, restricted s={restricted.s}, "
        f"n={obs.n}, attainable={attainable}",
        always=True,
    )
    return ExperimentSetup(cfg, problem, restricted, registry, bounds, truth, metadata)


def _score(
    setup: ExperimentSetup,
    exact: PosteriorApprox,
    exact_restricted: Tuple[np.ndarray, np.ndarray],
    approx: PosteriorApprox,
    truth: np.ndarray,
) -> CellMetrics:
    problem = setup.problem
    restricted = restricted_metrics(setup.restricted, approx, exact_restricted)
    full = fullspace_metrics(exact, approx)
    return CellMetrics(
        restricted_forstner=restricted.forstner,
        restricted_mahalanobis_sq=restricted.mahalanobis_sq,
        rel_frobenius=full.rel_frobenius,
        rel_mse=full.rel_mse,
        output_error_sq=output_error_sq(problem.forward, approx, problem.obs, truth),
    )


def _row(
    method: str,
    rank: int,
    replicate: int,
    metrics: Optional[CellMetrics],
    status: CellStatus,
    bound: Optional[BoundReport] = None,
) -> ResultRow:
    fields: Dict[str, object] = {}
    if metrics is not None:
        fields.update(metrics.model_dump())
    if bound is not None:
        fields.update(
            hankel_tail=bound.hankel_tail,
            inhom_trace_bound=bound.inhom_trace_bound,
            expected_output_error_bound=bound.expected_output_error_bound,
            kappa_estimate=bound.kappa_estimate,
        )
    return ResultRow(
        method=method,  # type: ignore[arg-type]
        rank=rank,
        replicate=replicate,
        wallclock_ms=status.execution_latency_ms,
        status=status,
        **fields,  # type: ignore[arg-type]
    )


def run_replicate(setup: ExperimentSetup, replicate: int, seed: np.random.SeedSequence) -> List[ResultRow]:
    cfg, problem = setup.cfg, setup.problem
    truth_seed, noise_seed = seed.spawn(2)
    truth = setup.truth if setup.truth is not None else sample_prior(problem.prior, truth_seed)
    data = generate_data(problem.system, problem.obs, truth, noise_seed, noise_free=cfg.noise_free)

    t0 = time.perf_counter()
    exact = exact_posterior(problem.prior, problem.forward, problem.obs, data)
    exact_ms = (time.perf_counter() - t0) * 1000.0
    exact_restricted = restricted_posterior(setup.restricted, problem.obs, data)

    rows: List[ResultRow] = []
    if not cfg.methods:
        executor: CellExecutor[CellMetrics] = CellExecutor(f"rep={replicate} Exact")
        metrics, status = executor.execute(
            lambda: _score(setup, exact, exact_restricted, exact, truth)
        )
        status = status.model_copy(update={"execution_latency_ms": exact_ms})
        rows.append(_row("Exact", problem.prior.rank, replicate, metrics, status))
        return rows

    for name in cfg.methods:
        reducer = setup.registry.get(name)
        for r in cfg.ranks:
            cell: CellExecutor[CellMetrics] = CellExecutor(f"rep={replicate} {name} r={r}")
            metrics, status = cell.execute(
                lambda: _score(setup, exact, exact_restricted, reducer.posterior(data, r), truth)
            )
            bound, _ = setup.bounds[(name, r)]
            rows.append(_row(name, r, replicate, metrics, status, bound))
    log("RUN", f"replicate {replicate} done ({len(rows)} cells)")
    return rows


def aggregate_rows(rows: List[ResultRow]) -> List[ResultRow]:
    """Mean over replicates per (method, rank), failed cells skipped."""
    if not rows:
        return []
    frame = pd.DataFrame([r.csv_record() for r in rows], columns=CSV_COLUMNS)
    frame["ok"] = [r.status.state == "success" for r in rows]
    numeric = CSV_COLUMNS[3:]
    frame[numeric] = frame[numeric].apply(pd.to_numeric, errors="coerce")
    grouped = frame.groupby(["method", "rank"], sort=False)
    means = grouped[numeric].mean()
    counts = grouped["ok"].agg(["sum", "count"])

    out: List[ResultRow] = []
    for (method, rank), values in means.iterrows():
        ok, total = int(counts.loc[(method, rank), "sum"]), int(counts.loc[(method, rank), "count"])
        status = CellStatus(
            state="success" if ok == total else "failed",
            message=f"{ok}/{total} replicates succeeded",
        )
        fields = {col: (None if math.isnan(v) else float(v)) for col, v in values.items()}
        out.append(ResultRow(method=method, rank=int(rank), replicate="mean", status=status, **fields))
    return out


def report_non_monotone(means: List[ResultRow], tol: float = 1e-10) -> List[Tuple[str, str, int]]:
    """Warn where a mean error curve grows with rank; returns (method, column, rank) per violation."""
    violations: List[Tuple[str, str, int]] = []
    by_method: Dict[str, List[ResultRow]] = {}
    for row in means:
        by_method.setdefault(row.method, []).append(row)
    for method, curve in by_method.items():
        curve = sorted(curve, key=lambda r: r.rank)
        for column in ("restricted_forstner", "restricted_mahalanobis_sq"):
            for lo, hi in zip(curve, curve[1:]):
                a, b = getattr(lo, column), getattr(hi, column)
                if a is not None and b is not None and b > a + tol * max(1.0, abs(a)):
                    violations.append((method, column, hi.rank))
                    warn("RUN", f"{method}: mean {column} grows from r={lo.rank} to r={hi.rank} ({a:.4g} → {b:.4g})")
    return violations


def report_seed_spread(
    rows: List[ResultRow], threshold: float = 0.2
) -> List[Tuple[str, str, int, float]]:
    """Compare mean errors of even and odd replicates, two disjoint seed sets.

    Returns (method, column, rank, relative change) wherever the change exceeds the
    threshold. Spread is logged, never raised.
    """
    cells = [r for r in rows if r.replicate != "mean" and r.status.state == "success"]
    columns = ["restricted_forstner", "restricted_mahalanobis_sq"]
    frame = pd.DataFrame([r.csv_record() for r in cells], columns=CSV_COLUMNS)
    if frame.empty:
        return []
    frame["half"] = frame["replicate"].astype(int) % 2
    if frame["half"].nunique() < 2:
        return []
    frame[columns] = frame[columns].apply(pd.to_numeric, errors="coerce")
    halves = frame.groupby(["method", "rank", "half"], sort=False)[columns].mean().unstack("half")

    spread: List[Tuple[str, str, int, float]] = []
    for (method, rank), values in halves.iterrows():
        for column in columns:
            a, b = float(values[(column, 0)]), float(values[(column, 1)])
            scale = max(abs(a), abs(b))
            if math.isnan(a) or math.isnan(b) or scale == 0.0:
                continue
            change = abs(a - b) / scale
            if change > threshold:
                spread.append((str(method), column, int(rank), change))
                warn("RUN", f"{method} r={rank}: mean {column} differs by {change:.0%} across seed sets")
    log("RUN", f"seed-set spread checked on {len(halves)} curves, {len(spread)} above {threshold:.0%}")
    return spread


async def run_experiment_async(
    cfg: ExperimentConfig, workers: Optional[int] = None
) -> Tuple[List[ResultRow], RunMetadata]:
    setup = build_setup(cfg)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.replicates)
    semaphore = asyncio.Semaphore(workers or settings.WORKERS)

    async def one(i: int) -> List[ResultRow]:
        async with semaphore:
            return await asyncio.to_thread(run_replicate, setup, i, seeds[i])

    per_replicate = await asyncio.gather(*(one(i) for i in range(cfg.replicates)))
    rows = [row for rep in per_replicate for row in rep]
    means = aggregate_rows(rows)
    report_non_monotone(means)
    report_seed_spread(rows)
    return rows + means, setup.metadata


def run_experiment(
    cfg: ExperimentConfig, workers: Optional[int] = None
) -> Tuple[List[ResultRow], RunMetadata]:
    return asyncio.run(run_experiment_async(cfg, workers))


def collect_bounds(cfg: ExperimentConfig) -> Tuple[List[Tuple[int, Optional[BoundReport], CellStatus]], RunMetadata]:
    """PD-BT bound reports for every configured rank, without running replicates."""
    setup = build_setup(cfg.model_copy(update={"methods": ["PdBT"]}))
    reports = [(r, *setup.bounds[("PdBT", r)]) for r in cfg.ranks]
    return reports, setup.metadata
