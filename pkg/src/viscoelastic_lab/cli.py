import argparse
import logging
import sys
from pathlib import Path

import polars as pl

from .config import Config, load_config
from .diagnostics import TrajectoryAccumulator, sample_report
from .errors import LabError, RegimeError, SnapshotFormatError, StabilityError, ValidationError
from .initdata import piola_initial_data
from .logging import configure_logging
from .manufactured import DEFAULT_RESOLUTIONS, run_mms_study
from .reports import emit_reports, format_float
from .snapshot_io import load_snapshot, persist_snapshot
from .sweep import SweepPlan, ns_comparison, run_inviscid_limit_sweep
from .timeint import History, OutputPolicy, run_simulation

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="velab", description="Viscoelastic half-plane laboratory"
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, required=True, help="Path to the TOML config")
    common.add_argument("--out", type=str, default="out", help="Output directory")
    common.add_argument("--quiet", action="store_true", help="Only log warnings and errors")
    common.add_argument(
        "--threads", type=int, default=1, help="Worker threads for sweep members"
    )
    common.add_argument(
        "--log-level",
        type=str,
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        default="INFO",
        help="Logging level",
    )
    common.add_argument(
        "--log-file",
        type=str,
        help="Path to log file (if not specified, logs to console only)",
    )

    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("run", parents=[common], help="Run a single simulation")
    mms = commands.add_parser("mms", parents=[common], help="Manufactured-solution study")
    mms.add_argument(
        "--resolutions",
        type=int,
        nargs="+",
        default=list(DEFAULT_RESOLUTIONS),
        help="nx of each run (ny = nx + 1)",
    )
    mms.add_argument("--t-end", type=float, default=0.2, help="Final time of each run")
    commands.add_parser("sweep", parents=[common], help="Inviscid-limit sweep")
    commands.add_parser(
        "compare-ns", parents=[common], help="Elastic vs Navier-Stokes layer study"
    )
    norms = commands.add_parser(
        "norms", parents=[common], help="Recompute diagnostics from stored snapshots"
    )
    norms.add_argument("snapshots", nargs="+", help="Snapshot files, any order")
    return parser


def command_run(config: Config, args, logger: logging.Logger) -> None:
    out = Path(args.out)
    run = config.run
    policy = OutputPolicy(
        sample_interval=run.sample_interval,
        snapshot_interval=run.snapshot_interval,
        snapshot_dir=out / "snapshots" if run.snapshot_interval else None,
        m=run.m,
        z0_depth=run.z0_depth,
        include_time=run.include_time,
    )
    initial = piola_initial_data(config.grid, config.init)
    result = run_simulation(
        initial,
        config.grid,
        config.params,
        config.mode,
        run.t_end,
        policy,
        cfl=run.cfl,
        sponge_rate=config.sponge_rate,
        logger=logger,
    )
    out.mkdir(parents=True, exist_ok=True)
    persist_snapshot(result.final, config.grid, config.params, out / "final.vels")
    emit_reports(result.series, None, out, m=run.m, logger=logger)


def command_mms(config: Config, args, logger: logging.Logger) -> None:
    study = run_mms_study(
        args.resolutions, t_end=args.t_end, params=config.params, logger=logger
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    columns = {"nx": [float(n) for n in study.resolutions], "h": list(study.spacings)}
    columns.update({f"err_{name}": list(values) for name, values in study.errors.items()})
    pl.DataFrame(
        {name: [format_float(v) for v in values] for name, values in columns.items()}
    ).write_csv(out / "mms.csv")
    for name in study.errors:
        orders = ", ".join(f"{order:.3f}" for order in study.orders(name))
        logger.info(f"MMS observed order {name}: {orders}")
    logger.info(f"Wrote {out / 'mms.csv'}")


def _sweep_plan(config: Config, args) -> SweepPlan:
    plan = SweepPlan(
        eps_list=config.sweep.eps_list,
        grid=config.grid,
        params=config.params,
        spec=config.init,
        t_end=config.run.t_end,
        cfl=config.run.cfl,
        sample_interval=max(config.run.sample_interval, 1),
        m=config.run.m,
        sponge_rate=config.sponge_rate,
        threads=args.threads,
    )
    return plan.with_coupling(config.sweep.mode == "elastic")


def command_sweep(config: Config, args, logger: logging.Logger) -> None:
    report = run_inviscid_limit_sweep(_sweep_plan(config, args), logger=logger)
    emit_reports([], report, args.out, logger=logger)
    if report.failures:
        logger.warning(f"{len(report.failures)} sweep member(s) failed; report is partial")


def command_compare_ns(config: Config, args, logger: logging.Logger) -> None:
    comparison = ns_comparison(_sweep_plan(config, args), logger=logger)
    emit_reports([], None, args.out, comparison=comparison, logger=logger)


def command_norms(config: Config, args, logger: logging.Logger) -> None:
    loaded = sorted((load_snapshot(path) for path in args.snapshots), key=lambda s: s[0].t)
    _, params, grid = loaded[0]
    for _, _, other_grid in loaded[1:]:
        if other_grid != grid:
            raise ValidationError("snapshots live on different grids")
    m = config.run.m
    history = History(capacity=max(config.run.z0_depth + 1, 1))
    accumulator = TrajectoryAccumulator()
    series = []
    for state, _, _ in loaded:
        history.append(state)
        series.append(
            sample_report(history, grid, params, accumulator, m, config.run.include_time)
        )
    emit_reports(series, None, args.out, m=m, logger=logger)


COMMANDS = {
    "run": command_run,
    "mms": command_mms,
    "sweep": command_sweep,
    "compare-ns": command_compare_ns,
    "norms": command_norms,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    # Configure logging
    logger = configure_logging(level=args.log_level, log_file=args.log_file, quiet=args.quiet)

    try:
        config = load_config(args.config)
        logger.info(f"Running {args.command} with config {args.config}")
        COMMANDS[args.command](config, args, logger)
    except (ValidationError, SnapshotFormatError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_VALIDATION
    except (RegimeError, StabilityError, LabError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
