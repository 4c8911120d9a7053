"""
Discrete conormal norms, energy and identity residuals of trajectories.

A "history" here is any time-ordered sequence of snapshots, newest last; the
norms evaluate at the newest snapshot and reach back only for Z0 = d/dt.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boundary import physical_rows, wall_traces
from .errors import RegimeError, ValidationError
from .grid_ops import (
    Axis,
    FieldSelector,
    Grid,
    MultiIndex,
    apply_conormal_multiindex,
    diff,
    diff2,
)
from .state_model import FIELD_NAMES, PhysParams, StateSnapshot, constraint_residuals, pressure

DEFAULT_MAX_ORDER = 2

# Field groups of the perturbation (rho - 1, u, F - I).
NORM_GROUPS = {
    "rho": ("rho",),
    "u": ("u", "v"),
    "F": ("f1", "f2", "f3", "f4"),
}

RECOVERY_NAMES = ("dyv", "dyu", "dyf3", "dyf4", "dyf1")


def perturbation(name: str):
    """Selector for a prognostic field minus its equilibrium value."""
    if name == "rho":
        return lambda state: state.rho - 1.0
    return lambda state: getattr(state, name)


def l2_norm_squared(values: np.ndarray, grid: Grid) -> float:
    """Trapezoid rule in y, uniform weights in periodic x."""
    row_sums = np.sum(values * values, axis=1) * grid.dx
    weights = np.full(grid.ny, grid.dy)
    weights[0] = weights[-1] = 0.5 * grid.dy
    return float(np.dot(weights, row_sums))


def sup_norm(values: np.ndarray) -> float:
    return float(np.max(np.abs(values)))


def conormal_norm_squared(
    history: Sequence,
    grid: Grid,
    field_selector: FieldSelector,
    m: int,
    include_time: bool = False,
    max_order: int = DEFAULT_MAX_ORDER,
) -> float:
    """Square of ``conormal_norm``; orders below zero give 0."""
    if m < 0:
        return 0.0
    if m > max_order:
        raise ValidationError(f"conormal order {m} exceeds the configured max {max_order}")
    if not history:
        raise ValidationError("history is empty")
    if include_time and len(history) < m + 1:
        raise ValidationError(
            f"history of depth {len(history)} is too short for time derivatives of order {m}"
        )
    return sum(
        l2_norm_squared(apply_conormal_multiindex(history, grid, alpha, field_selector), grid)
        for alpha in MultiIndex.up_to(m, include_time)
    )


def conormal_norm(
    history: Sequence,
    grid: Grid,
    field_selector: FieldSelector,
    m: int,
    include_time: bool = False,
    max_order: int = DEFAULT_MAX_ORDER,
) -> float:
    """
    Discrete conormal Sobolev norm ||f||_m at the newest snapshot.

    sqrt of the sum over |alpha| <= m of ||Z^alpha f||_L2^2; alpha0 is held at
    zero unless ``include_time``.

    Raises:
        ValidationError: If m exceeds ``max_order`` or the history is too short.
    """
    return math.sqrt(
        conormal_norm_squared(history, grid, field_selector, m, include_time, max_order)
    )


def _group_norm_squared(history, grid, selectors, m, include_time) -> float:
    return sum(
        conormal_norm_squared(history, grid, selector, m, include_time)
        for selector in selectors
    )


def _dy(name: str, grid: Grid, order: int = 1):
    def select(state):
        values = getattr(state, name)
        if order == 1:
            return diff(values, grid, Axis.Y)
        if order == 2:
            return diff2(values, grid, Axis.Y)
        return diff(diff2(values, grid, Axis.Y), grid, Axis.Y)

    return select


def _dx(name: str, grid: Grid):
    return lambda state: diff(getattr(state, name), grid, Axis.X)


class TrajectoryAccumulator:
    """
    Running time integrals (trapezoid rule on the sample times) and the
    running supremum behind Q(t).
    """

    def __init__(self):
        self._last_t: Optional[float] = None
        self._last_values: dict[str, float] = {}
        self.integrals: dict[str, float] = {}
        self.q_sup = 0.0

    def integrate(self, t: float, integrands: dict[str, float]) -> dict[str, float]:
        if self._last_t is None:
            self.integrals = {name: 0.0 for name in integrands}
        else:
            if t <= self._last_t:
                raise ValidationError("accumulator samples must advance in time")
            step = t - self._last_t
            for name, value in integrands.items():
                self.integrals[name] += 0.5 * step * (self._last_values[name] + value)
        self._last_t = t
        self._last_values = dict(integrands)
        return dict(self.integrals)

    def update_q(self, value: float) -> float:
        self.q_sup = max(self.q_sup, value)
        return self.q_sup


@dataclass(frozen=True)
class EnergyTerms:
    """The addends of the N_m proxy and their sum."""

    terms: dict[str, float]

    @property
    def total(self) -> float:
        return sum(self.terms.values())


def energy_nm(
    history: Sequence,
    grid: Grid,
    params: PhysParams,
    m: int,
    accumulator: Optional[TrajectoryAccumulator] = None,
    include_time: bool = False,
) -> EnergyTerms:
    """
    Desk-scale proxy of the energy N_m(t) at the newest snapshot.

    Instantaneous pieces: ||(rho-1, u, F-I)||_m^2, eps ||d_y(rho, f2)||_{m-1}^2,
    eps ||d_y^2(rho, f2)||_{m-2}^2. Time-integrated pieces (running trapezoid
    sums kept by ``accumulator``; zero without one): ||d_y(rho, u, F)||_{m-1}^2,
    ||d_y^2(rho, u, F)||_{m-2}^2, eps ||grad u||_m^2,
    eps^2 ||d_y^2 u||_{m-1}^2 and eps^2 ||d_y^3 u||_{m-2}^2.
    Norms of negative order are zero.
    """
    if m > DEFAULT_MAX_ORDER:
        raise ValidationError(f"energy proxy supports m <= {DEFAULT_MAX_ORDER}")
    eps = params.eps

    def norm2(selectors, order):
        return _group_norm_squared(history, grid, selectors, order, include_time)

    velocity = ("u", "v")
    state_hm = norm2([perturbation(name) for name in FIELD_NAMES], m)
    dy_rho_f2 = norm2([_dy("rho", grid), _dy("f2", grid)], m - 1)
    dyy_rho_f2 = norm2([_dy("rho", grid, 2), _dy("f2", grid, 2)], m - 2)

    integrands = {
        "dy_all": norm2([_dy(name, grid) for name in FIELD_NAMES], m - 1),
        "dyy_all": norm2([_dy(name, grid, 2) for name in FIELD_NAMES], m - 2),
        "grad_u": norm2(
            [_dx(name, grid) for name in velocity] + [_dy(name, grid) for name in velocity],
            m,
        ),
        "dyy_u": norm2([_dy(name, grid, 2) for name in velocity], m - 1),
        "dyyy_u": norm2([_dy(name, grid, 3) for name in velocity], m - 2),
    }
    if accumulator is not None:
        integrals = accumulator.integrate(history[-1].t, integrands)
    else:
        integrals = {name: 0.0 for name in integrands}

    return EnergyTerms(
        {
            "state": state_hm,
            "eps_dy_rho_f2": eps * dy_rho_f2,
            "eps_dyy_rho_f2": eps * dyy_rho_f2,
            "int_dy": integrals["dy_all"],
            "int_dyy": integrals["dyy_all"],
            "eps_int_grad_u": eps * integrals["grad_u"],
            "eps2_int_dyy_u": eps**2 * integrals["dyy_u"],
            "eps2_int_dyyy_u": eps**2 * integrals["dyyy_u"],
        }
    )


def _w1_inf(values: np.ndarray, grid: Grid) -> float:
    """||f||_{1,inf} with spatial conormal derivatives Z1, Z2."""
    return (
        sup_norm(values)
        + sup_norm(diff(values, grid, Axis.X))
        + sup_norm(diff(values, grid, Axis.Y, conormal=True))
    )


def q_instant(state: StateSnapshot, grid: Grid, gamma: float) -> float:
    """
    ||(p-1, u, G1, G2)||_{1,inf} + ||grad(p, u, G1, G2)||_{1,inf} at one time.
    """
    fields = [pressure(state.rho, gamma) - 1.0] + [
        getattr(state, name) for name in FIELD_NAMES[1:]
    ]
    total = 0.0
    for values in fields:
        total += _w1_inf(values, grid)
        total += _w1_inf(diff(values, grid, Axis.X), grid)
        total += _w1_inf(diff(values, grid, Axis.Y), grid)
    return total


def q_norm(history: Sequence, grid: Grid, params: Optional[PhysParams] = None) -> float:
    """
    Running supremum of the W^{1,inf}_co quantity Q over the history.

    Only spatial conormal derivatives enter; the pressure uses ``params.gamma``
    (default parameters when omitted).
    """
    if not history:
        raise ValidationError("history is empty")
    gamma = (params or PhysParams()).gamma
    return max(q_instant(state, grid, gamma) for state in history)


@dataclass(frozen=True, eq=False)
class RecoveryResiduals:
    """LHS - RHS of the normal-derivative recovery identities, as fields."""

    dyv: np.ndarray
    dyu: np.ndarray
    dyf3: np.ndarray
    dyf4: np.ndarray
    dyf1: np.ndarray

    def sup_norms(self, rows: slice = slice(None)) -> dict[str, float]:
        return {name: sup_norm(getattr(self, name)[rows]) for name in RECOVERY_NAMES}


def recovery_residuals(state: StateSnapshot, grid: Grid) -> RecoveryResiduals:
    """
    Residuals of the identities recovering d_y v, d_y u, d_y f3, d_y f4, d_y f1.

    The d_t f4 and d_t f2 needed by the d_y v and d_y u identities come from the
    transport equations with the advection written in divergence form,
    u.grad f = div(f u) - f div u, so those two residuals are the discrete
    product-rule defect: zero in exact arithmetic, O(h^2) on the grid. The
    d_y f3, d_y f4 and d_y f1 identities hold only on states satisfying
    rho det F = 1 and div(rho F^T) = 0.

    Raises:
        RegimeError: If 1 + f4 or rho is not positive.
    """
    rho, u, v = state.rho, state.u, state.v
    f1, f2, f3, f4 = state.f1, state.f2, state.f3, state.f4
    if np.any(1.0 + f4 <= 0) or np.any(rho <= 0):
        raise RegimeError("recovery identities need 1 + f4 > 0 and rho > 0")

    def dx(values):
        return diff(values, grid, Axis.X)

    def dy(values):
        return diff(values, grid, Axis.Y)

    ux, uy, vx, vy = dx(u), dy(u), dx(v), dy(v)
    div_u = ux + vy

    def flux_advection(values):
        return -(dx(values * u) + dy(values * v)) + values * div_u

    f4_t = flux_advection(f4) + f2 * vx + (1.0 + f4) * vy
    f2_t = flux_advection(f2) + f2 * ux + (1.0 + f4) * uy
    dyv = vy - (f4_t + u * dx(f4) + v * dy(f4) - f2 * vx) / (1.0 + f4)
    dyu = uy - (f2_t + u * dx(f2) + v * dy(f2) - f2 * ux) / (1.0 + f4)

    rho_y = dy(rho)
    flux_1 = dx(rho * (1.0 + f1))
    flux_2 = dx(rho * f2)
    dyf3 = dy(f3) - (-flux_1 - f3 * rho_y) / rho
    dyf4 = dy(f4) - (-flux_2 - (1.0 + f4) * rho_y) / rho
    dyf1 = dy(f1) - (
        dy(1.0 / rho)
        + f3 * dy(f2)
        - f2 / rho * (f3 * rho_y + flux_1)
        + (1.0 + f1) / rho * ((1.0 + f4) * rho_y + flux_2)
    ) / (1.0 + f4)
    return RecoveryResiduals(dyv=dyv, dyu=dyu, dyf3=dyf3, dyf4=dyf4, dyf1=dyf1)


def wall_layer_indicator(state: StateSnapshot, grid: Grid) -> float:
    """max_x |d_y u(x, 0)| with the one-sided second-order wall stencil."""
    return sup_norm(diff(state.u, grid, Axis.Y)[0])


@dataclass(frozen=True)
class NormReport:
    """
    Diagnostics of a trajectory at one sample time.

    ``norms[group][k]`` is ||group||_k^2 for k = 0..m; ``nm_terms`` holds the
    addends of ``nm_proxy``. ``time_derivatives`` tells whether Z0 entered the
    norms (it needs m + 1 samples of history).
    """

    t: float
    norms: dict[str, tuple[float, ...]]
    nm_proxy: float
    nm_terms: dict[str, float]
    q_proxy: float
    det_res: float
    piola_res: float
    rec_res_dyv: float
    rec_res_dyu: float
    rec_res_dyf3: float
    rec_res_dyf4: float
    rec_res_dyf1: float
    wall_layer: float
    wall_u_trace: float
    wall_f3_trace: float
    time_derivatives: bool = False
    m: int = DEFAULT_MAX_ORDER
    extra: dict[str, float] = field(default_factory=dict)

    @staticmethod
    def columns(m: int = DEFAULT_MAX_ORDER) -> list[str]:
        """Flat CSV header for reports of order m."""
        norm_columns = [f"norm2_{group}_k{k}" for group in NORM_GROUPS for k in range(m + 1)]
        nm_columns = [f"nm_{name}" for name in _NM_TERM_NAMES]
        return (
            ["t", "time_derivatives"]
            + norm_columns
            + ["nm_proxy"]
            + nm_columns
            + [
                "q_proxy",
                "det_res",
                "piola_res",
                "rec_res_dyv",
                "rec_res_dyu",
                "rec_res_dyf3",
                "rec_res_dyf4",
                "rec_res_dyf1",
                "wall_layer",
                "wall_u_trace",
                "wall_f3_trace",
            ]
        )

    def as_row(self) -> dict[str, float]:
        row = {"t": self.t, "time_derivatives": float(self.time_derivatives)}
        for group, values in self.norms.items():
            for k, value in enumerate(values):
                row[f"norm2_{group}_k{k}"] = value
        row["nm_proxy"] = self.nm_proxy
        for name in _NM_TERM_NAMES:
            row[f"nm_{name}"] = self.nm_terms.get(name, 0.0)
        for name in (
            "q_proxy",
            "det_res",
            "piola_res",
            "rec_res_dyv",
            "rec_res_dyu",
            "rec_res_dyf3",
            "rec_res_dyf4",
            "rec_res_dyf1",
            "wall_layer",
            "wall_u_trace",
            "wall_f3_trace",
        ):
            row[name] = getattr(self, name)
        return row


_NM_TERM_NAMES = (
    "state",
    "eps_dy_rho_f2",
    "eps_dyy_rho_f2",
    "int_dy",
    "int_dyy",
    "eps_int_grad_u",
    "eps2_int_dyy_u",
    "eps2_int_dyyy_u",
)


def sample_report(
    history: Sequence,
    grid: Grid,
    params: PhysParams,
    accumulator: TrajectoryAccumulator,
    m: int = DEFAULT_MAX_ORDER,
    include_time: bool = True,
) -> NormReport:
    """
    Assemble the full report at the newest snapshot of ``history``.

    Time derivatives enter the norms only once the history holds m + 1
    samples; earlier reports are spatial and say so in ``time_derivatives``.
    Constraint and recovery residuals are taken below the sponge band, whose
    relaxation is not a solution of the equations.
    """
    state = history[-1]
    rows = physical_rows(grid)
    use_time = include_time and len(history) >= m + 1

    norms = {
        group: tuple(
            _group_norm_squared(
                history, grid, [perturbation(name) for name in names], k, use_time and k > 0
            )
            for k in range(m + 1)
        )
        for group, names in NORM_GROUPS.items()
    }
    energy = energy_nm(history, grid, params, m, accumulator, include_time=use_time)
    q = accumulator.update_q(q_instant(state, grid, params.gamma))
    det_residual, piola_residual = constraint_residuals(state, grid)
    recovery = recovery_residuals(state, grid).sup_norms(rows)
    traces = wall_traces(state)

    return NormReport(
        t=state.t,
        norms=norms,
        nm_proxy=energy.total,
        nm_terms=energy.terms,
        q_proxy=q,
        det_res=sup_norm(det_residual[rows]),
        piola_res=sup_norm(piola_residual[:, rows]),
        rec_res_dyv=recovery["dyv"],
        rec_res_dyu=recovery["dyu"],
        rec_res_dyf3=recovery["dyf3"],
        rec_res_dyf4=recovery["dyf4"],
        rec_res_dyf1=recovery["dyf1"],
        wall_layer=wall_layer_indicator(state, grid),
        wall_u_trace=traces.u,
        wall_f3_trace=traces.f3,
        time_derivatives=use_time,
        m=m,
    )
