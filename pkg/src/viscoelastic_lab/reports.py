"""
Report files: norms.csv, sweep.json, sweep.csv and plotdata/*.dat.

Every float is written with 17 significant digits so the text re-parses to
the same double.
"""

import json
import logging
import math
from collections.abc import Sequence
from pathlib import Path
from typing import Optional

import polars as pl

from .diagnostics import DEFAULT_MAX_ORDER, NormReport
from .logging import logger as default_logger
from .sweep import ComparisonReport, SweepReport


def format_float(value: float) -> str:
    return f"{value:.17g}"


def _as_text(frame: pl.DataFrame) -> pl.DataFrame:
    """Render every numeric column as round-trip text."""
    return pl.DataFrame(
        {name: [format_float(float(v)) for v in frame[name].to_list()] for name in frame.columns},
        schema={name: pl.Utf8 for name in frame.columns},
    )


def _write_csv(frame: pl.DataFrame, path: Path, header: bool = True, separator: str = ","):
    _as_text(frame).write_csv(path, include_header=header, separator=separator)


def norms_frame(series: Sequence[NormReport], m: int = DEFAULT_MAX_ORDER) -> pl.DataFrame:
    columns = NormReport.columns(m)
    rows = [report.as_row() for report in series]
    return pl.DataFrame(
        {name: [float(row[name]) for row in rows] for name in columns},
        schema={name: pl.Float64 for name in columns},
    )


def _json_ready(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _json_ready(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(item) for item in value]
    return value


def _write_sweep(report: SweepReport, out_dir: Path, prefix: str) -> list[Path]:
    json_path = out_dir / f"{prefix}.json"
    json_path.write_text(json.dumps(_json_ready(report.to_dict()), indent=2))
    csv_path = out_dir / f"{prefix}.csv"
    _write_csv(report.table(), csv_path)

    plot_dir = out_dir / "plotdata"
    plot_dir.mkdir(exist_ok=True)
    written = [json_path, csv_path]
    table = report.table()
    for column in ("err_sup", "dy_err_sup", "wall_layer_peak", "nm_peak"):
        path = plot_dir / f"{prefix}_eps_vs_{column}.dat"
        _write_csv(table.select("eps", column), path, header=False, separator=" ")
        written.append(path)
    return written


def emit_reports(
    series: Sequence[NormReport],
    sweep: Optional[SweepReport],
    out_dir: str | Path,
    m: int = DEFAULT_MAX_ORDER,
    comparison: Optional[ComparisonReport] = None,
    logger: Optional[logging.Logger] = None,
) -> list[Path]:
    """
    Write the report files into ``out_dir`` and return their paths.

    norms.csv always exists (header only for an empty series). A sweep adds
    sweep.json, sweep.csv and eps-vs-peak plot files; a comparison adds both
    branches under the prefixes ``elastic`` and ``navier_stokes`` plus
    comparison.json. plotdata/t_vs_wall_layer.dat follows the series.
    """
    log = logger or default_logger
    out_dir = Path(out_dir)
    plot_dir = out_dir / "plotdata"
    plot_dir.mkdir(parents=True, exist_ok=True)

    frame = norms_frame(series, m)
    norms_path = out_dir / "norms.csv"
    _write_csv(frame, norms_path)
    wall_path = plot_dir / "t_vs_wall_layer.dat"
    _write_csv(frame.select("t", "wall_layer"), wall_path, header=False, separator=" ")
    written = [norms_path, wall_path]

    if sweep is not None:
        written += _write_sweep(sweep, out_dir, "sweep")
    if comparison is not None:
        written += _write_sweep(comparison.elastic, out_dir, "elastic")
        written += _write_sweep(comparison.navier_stokes, out_dir, "navier_stokes")
        comparison_path = out_dir / "comparison.json"
        comparison_path.write_text(json.dumps(_json_ready(comparison.to_dict()), indent=2))
        written.append(comparison_path)

    for path in written:
        log.info(f"Wrote {path}")
    return written
