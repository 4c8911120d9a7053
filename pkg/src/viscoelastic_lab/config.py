"""
Configuration documents.

A config is a TOML document with the optional tables [grid], [physics],
[init], [run] and [sweep]; missing keys take the defaults below and unknown
tables or keys are rejected.
"""

import math
import re
import tomllib
from dataclasses import dataclass, field
from typing import Any

from .boundary import DEFAULT_SPONGE_RATE, BcMode
from .errors import ConfigError, ValidationError
from .grid_ops import Grid, build_grid
from .initdata import DisplacementSpec
from .state_model import PhysParams
from .sweep import DEFAULT_EPS_LIST, SweepPlan

SWEEP_MODES = ("elastic", "navier_stokes")

DEFAULTS: dict[str, dict[str, Any]] = {
    "grid": {"nx": 64, "ny": 65, "lx": 2.0 * math.pi, "ly": 2.0},
    "physics": {
        "gamma": 1.4,
        "mu": 1.0,
        "lambda": 0.0,
        "eps": 0.01,
        "elastic_coupling": True,
        "filter_kappa": 0.01,
        "sponge_rate": DEFAULT_SPONGE_RATE,
    },
    "init": {
        "amplitude": 0.01,
        "kx": 1,
        "y_center": 0.5,
        "width": 0.45,
        "normal_fraction": 0.0,
        "velocity_profile": "none",
        "velocity_amplitude": 0.0,
    },
    "run": {
        "t_end": 1.0,
        "cfl": 0.4,
        "sample_interval": 10,
        "snapshot_interval": 0,
        "m": 2,
        "z0_depth": 3,
        "include_time": True,
    },
    "sweep": {"eps_list": list(DEFAULT_EPS_LIST), "mode": "elastic"},
}


@dataclass(frozen=True)
class RunSettings:
    t_end: float = 1.0
    cfl: float = 0.4
    sample_interval: int = 10
    snapshot_interval: int = 0
    m: int = 2
    z0_depth: int = 3
    include_time: bool = True


@dataclass(frozen=True)
class SweepSettings:
    eps_list: tuple[float, ...] = DEFAULT_EPS_LIST
    mode: str = "elastic"


@dataclass(frozen=True)
class Config:
    """A fully validated configuration."""

    grid: Grid
    params: PhysParams
    init: DisplacementSpec
    run: RunSettings = field(default_factory=RunSettings)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    sponge_rate: float = DEFAULT_SPONGE_RATE

    @property
    def mode(self) -> BcMode:
        """Boundary mode of a single run: ideal at eps = 0, else by coupling."""
        if self.params.eps == 0:
            return BcMode.IDEAL
        return BcMode.VISCOUS if self.params.elastic_coupling else BcMode.NS_COMPARE


def _syntax_error(error: tomllib.TOMLDecodeError) -> ConfigError:
    match = re.search(r"line (\d+)", str(error))
    where = f"line {match.group(1)}" if match else "unknown line"
    return ConfigError(f"syntax error at {where}: {error}")


def _merge(document: dict) -> dict[str, dict[str, Any]]:
    merged = {table: dict(values) for table, values in DEFAULTS.items()}
    for table, values in document.items():
        if table not in DEFAULTS:
            raise ConfigError(f"unknown table [{table}]")
        if not isinstance(values, dict):
            raise ConfigError(f"[{table}] must be a table")
        for key, value in values.items():
            if key not in DEFAULTS[table]:
                raise ConfigError(f"unknown key {table}.{key}")
            merged[table][key] = value
    return merged


def _check_types(merged: dict[str, dict[str, Any]]) -> None:
    for table, values in merged.items():
        for key, value in values.items():
            default = DEFAULTS[table][key]
            name = f"{table}.{key}"
            if isinstance(default, bool):
                ok = isinstance(value, bool)
            elif isinstance(default, int):
                ok = isinstance(value, int) and not isinstance(value, bool)
            elif isinstance(default, float):
                ok = isinstance(value, (int, float)) and not isinstance(value, bool)
            elif isinstance(default, str):
                ok = isinstance(value, str)
            else:
                ok = isinstance(value, list) and all(
                    isinstance(item, (int, float)) and not isinstance(item, bool)
                    for item in value
                )
            if not ok:
                raise ConfigError(f"{name} has the wrong type ({type(value).__name__})")


def _build(name: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except ValidationError as e:
        raise ConfigError(f"[{name}] {e}") from e


def parse_config(text: str) -> Config:
    """
    Parse and validate a configuration document.

    Raises:
        ConfigError: On a syntax error (with its line), an unknown table or
            key, a wrongly typed value or a value violating its rule.
    """
    try:
        document = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise _syntax_error(e) from e

    merged = _merge(document)
    _check_types(merged)
    g, p, i, r, s = (merged[name] for name in ("grid", "physics", "init", "run", "sweep"))

    grid = _build("grid", build_grid, nx=g["nx"], ny=g["ny"], lx=g["lx"], ly=g["ly"])
    params = _build(
        "physics",
        PhysParams,
        gamma=float(p["gamma"]),
        mu=float(p["mu"]),
        lam=float(p["lambda"]),
        eps=float(p["eps"]),
        elastic_coupling=p["elastic_coupling"],
        filter_kappa=float(p["filter_kappa"]),
    )
    if not p["sponge_rate"] >= 0:
        raise ConfigError("[physics] sponge_rate must be ≥ 0")
    init = _build("init", DisplacementSpec, lx=grid.lx, **{k: i[k] for k in DEFAULTS["init"]})
    if init.support_top >= grid.ly:
        raise ConfigError("[init] y_center + width must lie below the top of the strip")

    if not r["t_end"] >= 0:
        raise ConfigError("[run] t_end must be ≥ 0")
    if not r["cfl"] > 0:
        raise ConfigError("[run] cfl must be > 0")
    for key in ("sample_interval", "snapshot_interval", "z0_depth"):
        if r[key] < 0:
            raise ConfigError(f"[run] {key} must be ≥ 0")
    if not 0 <= r["m"] <= 2:
        raise ConfigError("[run] m must lie in 0..2")
    run = RunSettings(**r)

    if s["mode"] not in SWEEP_MODES:
        raise ConfigError(f"[sweep] mode must be one of {', '.join(SWEEP_MODES)}")
    eps_list = _build("sweep", SweepPlan, eps_list=s["eps_list"], grid=grid).eps_list

    return Config(
        grid=grid,
        params=params,
        init=init,
        run=run,
        sweep=SweepSettings(eps_list=eps_list, mode=s["mode"]),
        sponge_rate=float(p["sponge_rate"]),
    )


def load_config(path) -> Config:
    """Read and parse a configuration file."""
    with open(path, encoding="utf-8") as handle:
        return parse_config(handle.read())
