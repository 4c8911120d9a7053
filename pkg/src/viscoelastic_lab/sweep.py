"""
Vanishing-viscosity sweeps and the Navier-Stokes contrast study.
"""

import dataclasses
import logging
import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import duckdb
import numpy as np
import polars as pl
import pyarrow as pa

from .boundary import DEFAULT_SPONGE_RATE, BcMode
from .errors import LabError, ValidationError
from .grid_ops import Axis, Grid, diff
from .initdata import DisplacementSpec, piola_initial_data
from .logging import logger as default_logger
from .dynamics import Tendency
from .state_model import FIELD_NAMES, PhysParams, StateSnapshot
from .timeint import (
    OutputPolicy,
    RhsEvaluator,
    boundary_closure,
    cfl_dt,
    default_rhs,
    run_simulation,
)

DEFAULT_EPS_LIST = (1e-2, 5e-3, 2.5e-3, 1.25e-3)

SAMPLE_SCHEMA = pa.schema(
    [
        ("eps", pa.float64()),
        ("step", pa.int64()),
        ("t", pa.float64()),
        ("err_sup", pa.float64()),
        ("dy_err_sup", pa.float64()),
        ("wall_layer", pa.float64()),
        ("nm_proxy", pa.float64()),
    ]
)

PEAK_COLUMNS = ("err_sup", "dy_err_sup", "wall_layer_peak", "nm_peak")


@dataclass(frozen=True)
class SweepPlan:
    """
    A family of viscous runs sharing grid, data and parameters.

    Attributes:
        eps_list: Strictly decreasing viscosities in (0, 1).
        grid: The shared grid.
        params: Shared parameters; eps is replaced per member and
            ``elastic_coupling`` selects the branch.
        spec: Initial displacement and velocity.
        t_end: Final time of every run.
        cfl: CFL number used to pick the shared step.
        sample_interval: Steps between compared samples.
        m: Conormal order of the energy proxy.
        sponge_rate: Relaxation rate of the far-field sponge.
        threads: Worker threads for the member runs.
    """

    eps_list: tuple[float, ...] = DEFAULT_EPS_LIST
    grid: Optional[Grid] = None
    params: PhysParams = field(default_factory=PhysParams)
    spec: DisplacementSpec = field(default_factory=DisplacementSpec)
    t_end: float = 1.0
    cfl: float = 0.4
    sample_interval: int = 10
    m: int = 1
    sponge_rate: float = DEFAULT_SPONGE_RATE
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "eps_list", tuple(float(e) for e in self.eps_list))
        if not self.eps_list:
            raise ValidationError("eps_list must not be empty")
        if any(not 0 < e < 1 for e in self.eps_list):
            raise ValidationError("eps_list entries must lie in (0, 1)")
        if any(a <= b for a, b in zip(self.eps_list, self.eps_list[1:])):
            raise ValidationError("eps_list must be strictly decreasing")
        if self.grid is None:
            raise ValidationError("a sweep plan needs a grid")
        if not self.t_end > 0:
            raise ValidationError("t_end must be > 0")
        if isinstance(self.sample_interval, bool) or not (
            isinstance(self.sample_interval, int) and self.sample_interval > 0
        ):
            raise ValidationError("sample_interval must be a positive integer")
        if self.threads < 1:
            raise ValidationError("threads must be ≥ 1")

    def with_coupling(self, elastic_coupling: bool) -> "SweepPlan":
        return dataclasses.replace(
            self, params=dataclasses.replace(self.params, elastic_coupling=elastic_coupling)
        )


@dataclass(frozen=True)
class MemberFailure:
    eps: float
    error: str
    message: str
    t: Optional[float] = None


@dataclass
class SweepReport:
    """
    Per-eps peaks over the sampled times, aligned with ``eps_list``.

    Failed members hold NaN and are listed in ``failures``. ``exponents`` maps
    each peak column to the fitted log-log slope against eps (None when fewer
    than two positive values exist).
    """

    eps_list: tuple[float, ...]
    err_sup: list[float]
    dy_err_sup: list[float]
    wall_layer_peak: list[float]
    nm_peak: list[float]
    exponents: dict[str, Optional[float]]
    reference_wall_layer: float
    metadata: dict
    failures: list[MemberFailure] = field(default_factory=list)
    samples: pl.DataFrame = field(default_factory=pl.DataFrame)

    @property
    def complete(self) -> bool:
        return not self.failures

    def table(self) -> pl.DataFrame:
        return pl.DataFrame(
            {
                "eps": list(self.eps_list),
                "err_sup": self.err_sup,
                "dy_err_sup": self.dy_err_sup,
                "wall_layer_peak": self.wall_layer_peak,
                "nm_peak": self.nm_peak,
            },
            schema={name: pl.Float64 for name in ("eps",) + PEAK_COLUMNS},
        )

    def to_dict(self) -> dict:
        return {
            "eps_list": list(self.eps_list),
            "err_sup": self.err_sup,
            "dy_err_sup": self.dy_err_sup,
            "wall_layer_peak": self.wall_layer_peak,
            "nm_peak": self.nm_peak,
            "exponents": self.exponents,
            "reference_wall_layer": self.reference_wall_layer,
            "metadata": self.metadata,
            "failures": [failure.__dict__ for failure in self.failures],
        }


@dataclass
class ComparisonReport:
    """
    The coupled and Navier-Stokes branches side by side.

    Layer exponents are the negated slopes of the peak wall indicator against
    eps, so a layer of width sqrt(eps) gives 1/2.
    """

    elastic: SweepReport
    navier_stokes: SweepReport
    elastic_layer_exponent: Optional[float]
    ns_layer_exponent: Optional[float]
    reference_wall_layer: float

    @property
    def exponent_gap(self) -> Optional[float]:
        if self.elastic_layer_exponent is None or self.ns_layer_exponent is None:
            return None
        return self.ns_layer_exponent - self.elastic_layer_exponent

    def to_dict(self) -> dict:
        return {
            "elastic": self.elastic.to_dict(),
            "navier_stokes": self.navier_stokes.to_dict(),
            "elastic_layer_exponent": self.elastic_layer_exponent,
            "ns_layer_exponent": self.ns_layer_exponent,
            "exponent_gap": self.exponent_gap,
            "reference_wall_layer": self.reference_wall_layer,
        }


def fit_rate(pairs: Iterable[tuple[float, float]]) -> float:
    """
    Least-squares slope of log(err) against log(eps).

    Raises:
        ValidationError: With fewer than two pairs or a nonpositive entry.
    """
    pairs = list(pairs)
    if len(pairs) < 2:
        raise ValidationError("fit_rate needs at least two pairs")
    eps, err = np.array(pairs, dtype=float).T
    if np.any(~(eps > 0)) or np.any(~(err > 0)):
        raise ValidationError("fit_rate needs positive eps and error values")
    slope, _ = np.polyfit(np.log(eps), np.log(err), 1)
    return float(slope)


def _try_fit(eps_list: Sequence[float], values: Sequence[float]) -> Optional[float]:
    pairs = [(e, v) for e, v in zip(eps_list, values) if math.isfinite(v) and v > 0]
    if len(pairs) < 2:
        return None
    return fit_rate(pairs)


class SampleStore:
    """
    In-memory DuckDB table of per-sample comparison rows.

    Rows arrive as a pyarrow table and the per-eps peaks come back through a
    GROUP BY query as a polars frame.
    """

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.conn = duckdb.connect()
        self.logger = logger or default_logger
        columns = ", ".join(
            f"{f.name} {'BIGINT' if pa.types.is_integer(f.type) else 'DOUBLE'}"
            for f in SAMPLE_SCHEMA
        )
        self.conn.execute(f"CREATE TABLE samples ({columns})")

    def insert(self, rows: list[dict]) -> None:
        table = pa.Table.from_pylist(rows, schema=SAMPLE_SCHEMA)
        self.conn.register("incoming", table)
        self.conn.execute("INSERT INTO samples SELECT * FROM incoming")
        self.conn.unregister("incoming")
        self.logger.debug(f"Stored {table.num_rows} sample rows")

    def peaks(self) -> pl.DataFrame:
        result = self.conn.execute(
            """
            SELECT eps,
                   max(err_sup) AS err_sup,
                   max(dy_err_sup) AS dy_err_sup,
                   max(wall_layer) AS wall_layer_peak,
                   max(nm_proxy) AS nm_peak,
                   count(*) AS samples
            FROM samples
            GROUP BY eps
            ORDER BY eps DESC
            """
        ).fetch_arrow_table()
        return pl.from_arrow(result)

    def all_rows(self) -> pl.DataFrame:
        return pl.from_arrow(
            self.conn.execute("SELECT * FROM samples ORDER BY eps DESC, step").fetch_arrow_table()
        )

    def close(self) -> None:
        self.conn.close()


def shared_dt(plan: SweepPlan, initial: StateSnapshot) -> float:
    """The most restrictive CFL step over the members and the eps = 0 reference."""
    return min(
        cfl_dt(initial, plan.grid, plan.params.with_eps(eps), plan.cfl)
        for eps in (0.0,) + plan.eps_list
    )


def _sup_difference(
    state: StateSnapshot,
    reference: StateSnapshot,
    grid: Grid,
    names: Sequence[str] = FIELD_NAMES,
):
    err, dy_err = 0.0, 0.0
    for name in names:
        gap = getattr(state, name) - getattr(reference, name)
        err = max(err, float(np.max(np.abs(gap))))
        dy_err = max(dy_err, float(np.max(np.abs(diff(gap, grid, Axis.Y)))))
    return err, dy_err


def _branch_initial(plan: SweepPlan) -> StateSnapshot:
    initial = piola_initial_data(plan.grid, plan.spec)
    if plan.params.elastic_coupling:
        return initial
    # Navier-Stokes branch: keep the velocity, reset rho = 1 and F = I.
    zeros = plan.grid.zeros
    return initial.replace(
        rho=np.ones(plan.grid.shape), f1=zeros(), f2=zeros(), f3=zeros(), f4=zeros()
    )



def frozen_deformation(rhs: RhsEvaluator) -> RhsEvaluator:
    """Wrap a right-hand side so that F stays at its current value (F = I in the NS branch)."""

    def evaluate(state: StateSnapshot, grid: Grid, params: PhysParams) -> Tendency:
        tendency = rhs(state, grid, params)
        zeros = np.zeros_like(state.rho)
        return dataclasses.replace(tendency, d_f1=zeros, d_f2=zeros, d_f3=zeros, d_f4=zeros)

    return evaluate


def _failure(eps: float, error: LabError) -> MemberFailure:
    return MemberFailure(
        eps=eps, error=type(error).__name__, message=str(error), t=getattr(error, "t", None)
    )


def run_inviscid_limit_sweep(
    plan: SweepPlan, logger: Optional[logging.Logger] = None
) -> SweepReport:
    """
    Run the eps = 0 reference once, then every member, and compare them.

    Differences are taken at the common sample steps (all runs share one dt),
    with d_y from ``diff``. A failing member is logged and recorded; the rest
    of the report stays valid. A failing reference leaves nothing to compare
    against: it is recorded with eps = 0 and the members are skipped.

    Without elastic coupling F is held at I in every run and only rho, u and v
    enter the differences.
    """
    log = logger or default_logger
    grid = plan.grid
    coupled = plan.params.elastic_coupling
    member_mode = BcMode.VISCOUS if coupled else BcMode.NS_COMPARE
    initial = _branch_initial(plan)
    dt = shared_dt(plan, initial)
    policy = OutputPolicy(sample_interval=plan.sample_interval, m=plan.m, include_time=False)
    compared = FIELD_NAMES if coupled else ("rho", "u", "v")

    def branch_rhs(mode: BcMode) -> RhsEvaluator:
        rhs = default_rhs(mode)
        return rhs if coupled else frozen_deformation(rhs)

    def branch_closure(mode: BcMode):
        return boundary_closure(grid, mode, plan.sponge_rate, constrained=coupled)

    reference_states: dict[int, StateSnapshot] = {}
    reference_layer = 0.0

    def keep_reference(step, state, report):
        nonlocal reference_layer
        reference_states[step] = state
        reference_layer = max(reference_layer, report.wall_layer)

    failures: list[MemberFailure] = []
    log.info(f"Sweep reference run (eps=0, coupling={coupled}, dt={dt:.3e})")
    try:
        run_simulation(
            initial,
            grid,
            plan.params.with_eps(0.0),
            BcMode.IDEAL,
            plan.t_end,
            policy,
            cfl=plan.cfl,
            dt=dt,
            rhs=branch_rhs(BcMode.IDEAL),
            closure=branch_closure(BcMode.IDEAL),
            sponge_rate=plan.sponge_rate,
            on_sample=keep_reference,
            logger=log,
        )
    except LabError as e:
        log.error(f"Sweep reference run failed, skipping all members: {e}")
        failures.append(_failure(0.0, e))

    def run_member(eps: float) -> list[dict]:
        rows: list[dict] = []

        def compare(step, state, report):
            err, dy_err = _sup_difference(state, reference_states[step], grid, compared)
            rows.append(
                {
                    "eps": eps,
                    "step": step,
                    "t": state.t,
                    "err_sup": err,
                    "dy_err_sup": dy_err,
                    "wall_layer": report.wall_layer,
                    "nm_proxy": report.nm_proxy,
                }
            )

        log.info(f"Sweep member eps={eps:g} started")
        run_simulation(
            initial,
            grid,
            plan.params.with_eps(eps),
            member_mode,
            plan.t_end,
            policy,
            cfl=plan.cfl,
            dt=dt,
            rhs=branch_rhs(member_mode),
            closure=branch_closure(member_mode),
            sponge_rate=plan.sponge_rate,
            on_sample=compare,
            logger=log,
        )
        log.info(f"Sweep member eps={eps:g} finished with {len(rows)} samples")
        return rows

    store = SampleStore(logger=log)
    try:
        with ThreadPoolExecutor(max_workers=plan.threads) as pool:
            members = () if failures else plan.eps_list
            futures = [(eps, pool.submit(run_member, eps)) for eps in members]
            for eps, future in futures:
                try:
                    store.insert(future.result())
                except LabError as e:
                    log.error(f"Sweep member eps={eps:g} failed: {e}")
                    failures.append(_failure(eps, e))
        peaks = {row["eps"]: row for row in store.peaks().iter_rows(named=True)}
        samples = store.all_rows()
    finally:
        store.close()

    def column(name: str) -> list[float]:
        return [
            float(peaks[eps][name]) if eps in peaks else math.nan for eps in plan.eps_list
        ]

    report = SweepReport(
        eps_list=plan.eps_list,
        err_sup=column("err_sup"),
        dy_err_sup=column("dy_err_sup"),
        wall_layer_peak=column("wall_layer_peak"),
        nm_peak=column("nm_peak"),
        exponents={},
        reference_wall_layer=reference_layer,
        metadata={
            "nx": grid.nx,
            "ny": grid.ny,
            "lx": grid.lx,
            "ly": grid.ly,
            "amplitude": plan.spec.amplitude,
            "velocity_profile": plan.spec.velocity_profile,
            "velocity_amplitude": plan.spec.velocity_amplitude,
            "elastic_coupling": coupled,
            "filter_kappa": plan.params.filter_kappa,
            "sample_interval": plan.sample_interval,
            "dt": dt,
            "t_end": plan.t_end,
        },
        failures=failures,
        samples=samples,
    )
    report.exponents = {
        name: _try_fit(plan.eps_list, getattr(report, name)) for name in PEAK_COLUMNS
    }
    return report


def ns_comparison(plan: SweepPlan, logger: Optional[logging.Logger] = None) -> ComparisonReport:
    """
    Run the sweep with elastic coupling on and off.

    The off branch starts from rho = 1, F = I with the same velocity, holds
    F = I throughout and is compared on (rho, u, v) against the compressible
    Euler run. Without an initial shear both
    branches are layer-free; that is logged as a warning, not an error.
    """
    log = logger or default_logger
    spec = plan.spec
    if spec.velocity_profile != "shear" or spec.velocity_amplitude == 0:
        log.warning("Comparison study without tangential shear; both branches stay layer-free")

    elastic = run_inviscid_limit_sweep(plan.with_coupling(True), logger=log)
    navier_stokes = run_inviscid_limit_sweep(plan.with_coupling(False), logger=log)

    def layer_exponent(report: SweepReport) -> Optional[float]:
        slope = report.exponents.get("wall_layer_peak")
        return None if slope is None else -slope

    comparison = ComparisonReport(
        elastic=elastic,
        navier_stokes=navier_stokes,
        elastic_layer_exponent=layer_exponent(elastic),
        ns_layer_exponent=layer_exponent(navier_stokes),
        reference_wall_layer=elastic.reference_wall_layer,
    )
    log.info(
        f"Layer exponents: elastic={comparison.elastic_layer_exponent}, "
        f"navier_stokes={comparison.ns_layer_exponent}"
    )
    return comparison
