# File: smoothbench/cli.py

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import pandas as pd
from pydantic import ValidationError
from rich.panel import Panel

from smoothbench.config.presets import PRESETS, get_preset
from smoothbench.core.errors import ConfigError, SmoothBenchError
from smoothbench.models.experiment_config import ExperimentConfig, SyntheticSystem
from smoothbench.models.result_row import ResultRow
from smoothbench.runner.emit import emit, write_metadata
from smoothbench.runner.experiment import (
    collect_bounds,
    load_experiment_system,
    make_experiment_prior,
    run_experiment,
)
from smoothbench.runner.matrix_market import write_matrix
from smoothbench.runner.synth import synth_system
from smoothbench.utils.rich_output import console, error, log, print_json, print_table


def print_help() -> None:
    console.print(
        Panel.fit(
            "[bold yellow]Usage[/bold yellow]:\n"
            "  smoothbench <command> [options]\n\n"
            "[bold]Commands:[/bold]\n"
            "  gen-system   write a random stable system (A.mtx, B.mtx, C.mtx) to --out\n"
            "  gen-prior    build the configured prior and write its factor to --out\n"
            "  run          run the replicate sweep and emit one row per cell plus means\n"
            "  bounds       print the PD-BT error bounds for every configured rank\n\n"
            "[bold]Options:[/bold]\n"
            "  --config <file.json>    experiment configuration\n"
            f"  --preset <name>         one of: {', '.join(PRESETS)}\n"
            "  --out <path>            output file (or directory for gen-system); stdout if omitted\n"
            "  --format csv|json       output format for run/bounds (default csv)\n"
            "  --seed <int>            overrides the configured seed\n"
            "  --truth <file.mtx>      fixed initial condition instead of prior draws\n"
            "  --noise-free            simulate data without measurement noise\n"
            "  --workers <int>         concurrent replicates (default SMOOTHBENCH_WORKERS)\n"
            "  --d, --d-out, --spread  gen-system dimensions and spectrum spread\n\n"
            "[bold]Examples:[/bold]\n"
            "  smoothbench run --preset toy --out results/toy.csv\n"
            "  smoothbench bounds --config experiments/desk.json --format json\n"
            "  smoothbench gen-system --d 40 --d-out 3 --seed 7 --out data/synthetic40",
            title="smoothbench",
            border_style="cyan",
        )
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Balanced truncation benchmarks for linear Bayesian smoothing.", add_help=False
    )
    parser.add_argument("command", nargs="?", choices=["gen-system", "gen-prior", "run", "bounds"])
    parser.add_argument("--config", type=Path, help="JSON experiment configuration")
    parser.add_argument("--preset", help="Named preset configuration")
    parser.add_argument("--out", type=Path, help="Output path")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--truth", type=Path)
    parser.add_argument("--noise-free", action="store_true")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--d", type=int, default=20)
    parser.add_argument("--d-out", type=int, default=3)
    parser.add_argument("--spread", type=float, default=10.0)
    parser.add_argument("--help", "-h", action="store_true", help="Show help and usage")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None and args.preset is not None:
        raise ConfigError("--config and --preset are mutually exclusive")
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as err:
            raise ConfigError(f"cannot read config {args.config}: {err}") from err
        cfg = ExperimentConfig.model_validate_json(text)
        log("CONFIG", f"loaded {args.config}")
    elif args.preset is not None:
        cfg = get_preset(args.preset)
        log("CONFIG", f"using preset {args.preset}")
    else:
        raise ConfigError("one of --config or --preset is required")

    overrides: Dict[str, object] = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.truth is not None:
        overrides["truth"] = args.truth
    if args.noise_free:
        overrides["noise_free"] = True
    if overrides:
        # re-validate so overrides face the same checks as the file
        cfg = ExperimentConfig.model_validate({**cfg.model_dump(), **overrides})
    return cfg


def cmd_gen_system(args: argparse.Namespace) -> None:
    if args.out is None:
        raise ConfigError("gen-system needs --out <directory>")
    try:
        spec = SyntheticSystem(d=args.d, d_out=args.d_out, spread=args.spread, seed=args.seed or 0)
    except ValidationError as err:
        raise ConfigError(str(err)) from err
    sys_ = synth_system(spec.d, spec.d_out, spec.spread, spec.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    comment = f"synthetic d={spec.d} spread={spec.spread} seed={spec.seed}"
    write_matrix(args.out / "A.mtx", sys_.a, comment)
    write_matrix(args.out / "C.mtx", sys_.c, comment)
    assert sys_.b is not None
    write_matrix(args.out / "B.mtx", sys_.b, comment)
    log("GEN", f"wrote A.mtx, B.mtx, C.mtx to {args.out}", always=True)


def cmd_gen_prior(args: argparse.Namespace) -> None:
    cfg = load_config(args)
    prior, report = make_experiment_prior(cfg, load_experiment_system(cfg))
    print_json(report.model_dump(mode="json"))
    if args.out is None:
        return
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_matrix(args.out, prior.cov_factor.factor, f"{report.kind} prior factor, rank {report.rank}")
    write_metadata(report, args.out)
    log("GEN", f"wrote prior factor to {args.out}", always=True)


def _summary(rows: Sequence[ResultRow]) -> None:
    means = [r for r in rows if r.replicate == "mean"]
    print_table(
        "Mean over replicates",
        ["method", "rank", "forstner", "mahalanobis²", "rel frob", "rel mse", "status"],
        (
            [
                r.method,
                r.rank,
                r.restricted_forstner,
                r.restricted_mahalanobis_sq,
                r.rel_frobenius,
                r.rel_mse,
                r.status.message,
            ]
            for r in means
        ),
    )


def cmd_run(args: argparse.Namespace) -> None:
    cfg = load_config(args)
    rows, meta = run_experiment(cfg, workers=args.workers)
    _summary(rows)
    emit(rows, args.format, args.out)
    write_metadata(meta, args.out)


def cmd_bounds(args: argparse.Namespace) -> None:
    cfg = load_config(args)
    reports, meta = collect_bounds(cfg)
    records: List[Dict[str, object]] = []
    for rank, report, status in reports:
        if report is None:
            records.append({"rank_r": rank, "status": status.message or status.code})
        else:
            records.append({**report.model_dump(), "status": status.state})
    print_table(
        "PD-BT bounds",
        ["rank", "hankel tail", "trace bound", "κ̂", "impulse err²", "E‖output err‖ bound"],
        (
            [
                rec["rank_r"],
                rec.get("hankel_tail"),
                rec.get("inhom_trace_bound"),
                rec.get("kappa_estimate"),
                rec.get("impulse_error_sq"),
                rec.get("expected_output_error_bound"),
            ]
            for rec in records
        ),
    )
    if args.format == "json":
        text = json.dumps(records, indent=2) + "\n"
    else:
        text = str(pd.DataFrame(records).to_csv(index=False, float_format="%.17g", lineterminator="\n"))
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
        write_metadata(meta, args.out)


COMMANDS: Dict[str, Callable[[argparse.Namespace], None]] = {
    "gen-system": cmd_gen_system,
    "gen-prior": cmd_gen_prior,
    "run": cmd_run,
    "bounds": cmd_bounds,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.help or args.command is None:
        print_help()
        return 0
    try:
        COMMANDS[args.command](args)
    except SmoothBenchError as err:
        error(str(err))
        return err.exit_code
    except ValidationError as err:
        error(f"invalid configuration:\n{err}")
        return ConfigError.exit_code
    except OSError as err:
        error(str(err))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
