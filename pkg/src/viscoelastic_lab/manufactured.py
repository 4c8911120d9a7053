"""
Manufactured solutions for verifying the viscous discretization.

A smooth field set U(t, x, y) is chosen symbolically, the forcing
S = d_t U - R(U) is derived with sympy from the continuous equations, and the
discrete system d_t U_h = R_h(U_h) + S is integrated from U(0). The error
U_h - U then measures the truncation error of R_h directly.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import sympy as sp

from .boundary import BcMode, enforce_boundaries
from .diagnostics import l2_norm_squared
from .dynamics import Tendency, rhs_viscous
from .errors import ValidationError
from .grid_ops import Grid, build_grid
from .logging import logger as default_logger
from .state_model import FIELD_NAMES, PhysParams, StateSnapshot
from .timeint import OutputPolicy, run_simulation

t, x, y = sp.symbols("t x y", real=True)
gamma, mu, lam, eps, coupling = sp.symbols("gamma mu lam eps coupling", real=True)
_ARGS = (t, x, y, gamma, mu, lam, eps, coupling)

DEFAULT_RESOLUTIONS = (32, 64, 128)


def continuous_rhs(fields: dict[str, sp.Expr]) -> dict[str, sp.Expr]:
    """
    The viscous system's right-hand side applied to symbolic fields.

    Parameters enter as the module symbols gamma, mu, lam, eps and coupling
    (1 keeps the elastic stress, 0 drops it).
    """
    rho, u, v = fields["rho"], fields["u"], fields["v"]
    f1, f2, f3, f4 = fields["f1"], fields["f2"], fields["f3"], fields["f4"]

    def dx(e):
        return sp.diff(e, x)

    def dy(e):
        return sp.diff(e, y)

    def advection(e):
        return -(u * dx(e) + v * dy(e))

    p = rho**gamma
    tau11 = rho * ((1 + f1) ** 2 + f2**2)
    tau12 = rho * ((1 + f1) * f3 + f2 * (1 + f4))
    tau22 = rho * (f3**2 + (1 + f4) ** 2)
    div_u = dx(u) + dy(v)

    mom_x = (
        -rho * (u * dx(u) + v * dy(u))
        - dx(p)
        + coupling * (dx(tau11) + dy(tau12))
        + eps * (mu * (dx(dx(u)) + dy(dy(u))) + (mu + lam) * dx(div_u))
    )
    mom_y = (
        -rho * (u * dx(v) + v * dy(v))
        - dy(p)
        + coupling * (dx(tau12) + dy(tau22))
        + eps * (mu * (dx(dx(v)) + dy(dy(v))) + (mu + lam) * dy(div_u))
    )
    return {
        "rho": -(dx(rho * u) + dy(rho * v)),
        "u": mom_x / rho,
        "v": mom_y / rho,
        "f1": advection(f1) + (1 + f1) * dx(u) + f3 * dy(u),
        "f2": advection(f2) + f2 * dx(u) + (1 + f4) * dy(u),
        "f3": advection(f3) + (1 + f1) * dx(v) + f3 * dy(v),
        "f4": advection(f4) + f2 * dx(v) + (1 + f4) * dy(v),
    }


def _on_grid(value, shape) -> np.ndarray:
    return np.broadcast_to(np.asarray(value, dtype=float), shape).copy()


@dataclass
class ManufacturedSolution:
    """
    Symbolic exact fields in (t, x, y), periodic in x.

    u, v and f3 must vanish on the wall y = 0 so the no-slip closure and the
    exact solution agree there.
    """

    expressions: dict[str, sp.Expr]
    _field_functions: dict = field(init=False, repr=False)
    _forcing_functions: dict = field(init=False, repr=False)

    def __post_init__(self):
        missing = set(FIELD_NAMES) - set(self.expressions)
        if missing:
            raise ValidationError(f"manufactured solution lacks {', '.join(sorted(missing))}")
        for name in ("u", "v", "f3"):
            if sp.simplify(self.expressions[name].subs(y, 0)) != 0:
                raise ValidationError(f"manufactured {name} must vanish at y = 0")

        rhs = continuous_rhs(self.expressions)
        self._field_functions = {
            name: sp.lambdify(_ARGS, self.expressions[name], modules="numpy")
            for name in FIELD_NAMES
        }
        self._forcing_functions = {
            name: sp.lambdify(
                _ARGS, sp.diff(self.expressions[name], t) - rhs[name], modules="numpy"
            )
            for name in FIELD_NAMES
        }

    @classmethod
    def trigonometric(cls, lx: float = 1.0, amplitude: float = 0.05) -> "ManufacturedSolution":
        """Products of trigonometric modes, periodic in x with period lx."""
        k = 2 * sp.pi / sp.Float(lx)
        a = sp.Float(amplitude)
        wall = sp.sin(sp.pi * y)
        return cls(
            {
                "rho": 1 + a * sp.cos(t) * sp.sin(k * x) * sp.cos(sp.pi * y),
                "u": a * sp.cos(t) * sp.cos(k * x) * wall,
                "v": a * sp.cos(t + 1) * sp.sin(k * x) * wall,
                "f1": a * sp.sin(t + 1) * sp.cos(k * x) * sp.cos(sp.pi * y),
                "f2": a * sp.cos(t) * sp.sin(k * x) * sp.cos(sp.pi * y / 2),
                "f3": a * sp.sin(t + 2) * sp.cos(k * x) * wall,
                "f4": a * sp.cos(2 * t) * sp.sin(k * x + 1) * sp.cos(sp.pi * y),
            }
        )

    @classmethod
    def uniform(cls) -> "ManufacturedSolution":
        """The equilibrium; its forcing vanishes identically."""
        return cls({name: sp.Integer(1 if name == "rho" else 0) for name in FIELD_NAMES})

    def _args(self, time: float, grid: Grid, params: PhysParams):
        X, Y = grid.mesh()
        return (
            time,
            X,
            Y,
            params.gamma,
            params.mu,
            params.lam,
            params.eps,
            1.0 if params.elastic_coupling else 0.0,
        )

    def evaluate(self, time: float, grid: Grid) -> StateSnapshot:
        args = self._args(time, grid, PhysParams())
        return StateSnapshot.from_fields(
            {
                name: _on_grid(function(*args), grid.shape)
                for name, function in self._field_functions.items()
            },
            t=time,
        )

    def closure(self, grid: Grid, mode: BcMode = BcMode.VISCOUS):
        """No-slip wall plus exact Dirichlet data on the top row."""

        def close(state: StateSnapshot, sponge_dt: float) -> StateSnapshot:
            return enforce_boundaries(
                state, grid, mode, far_field=self.evaluate(state.t, grid)
            )

        return close


def mms_forcing(
    mms: ManufacturedSolution, time: float, grid: Grid, params: PhysParams
) -> Tendency:
    """Source term d_t U - R(U) of the exact solution, sampled on the grid."""
    args = mms._args(time, grid, params)
    return Tendency.from_fields(
        {
            name: _on_grid(function(*args), grid.shape)
            for name, function in mms._forcing_functions.items()
        }
    )


def forced_rhs(mms: ManufacturedSolution):
    """rhs_viscous plus the manufactured forcing at the state's time."""

    def evaluate(state: StateSnapshot, grid: Grid, params: PhysParams) -> Tendency:
        return rhs_viscous(state, grid, params) + mms_forcing(mms, state.t, grid, params)

    return evaluate


def solution_errors(
    state: StateSnapshot, mms: ManufacturedSolution, grid: Grid
) -> dict[str, float]:
    """Discrete L2 error of each field against the exact solution at state.t."""
    exact = mms.evaluate(state.t, grid).fields()
    return {
        name: math.sqrt(l2_norm_squared(values - exact[name], grid))
        for name, values in state.fields().items()
    }


def run_manufactured(
    mms: ManufacturedSolution,
    grid: Grid,
    params: PhysParams,
    t_end: float,
    *,
    cfl: float = 0.4,
    dt: Optional[float] = None,
    logger: Optional[logging.Logger] = None,
) -> dict[str, float]:
    """Integrate the forced problem from the exact data and return the L2 errors."""
    result = run_simulation(
        mms.evaluate(0.0, grid),
        grid,
        params,
        BcMode.VISCOUS,
        t_end,
        OutputPolicy(sample_interval=0),
        cfl=cfl,
        dt=dt,
        rhs=forced_rhs(mms),
        closure=mms.closure(grid),
        logger=logger,
    )
    return solution_errors(result.final, mms, grid)


@dataclass(frozen=True)
class MmsStudy:
    """
    Errors of a refinement study.

    Attributes:
        resolutions: nx of each run (ny = nx + 1).
        spacings: Largest grid spacing of each run.
        errors: Field name -> L2 error per resolution.
    """

    resolutions: tuple[int, ...]
    spacings: tuple[float, ...]
    errors: dict[str, tuple[float, ...]]

    def orders(self, name: str) -> tuple[float, ...]:
        """Observed order between consecutive resolutions."""
        errors = self.errors[name]
        return tuple(
            math.log(errors[k] / errors[k + 1]) / math.log(self.spacings[k] / self.spacings[k + 1])
            for k in range(len(errors) - 1)
        )

    def min_order(self, names: Sequence[str] = ("rho", "u", "v", "f2")) -> float:
        return min(min(self.orders(name)) for name in names)


def run_mms_study(
    resolutions: Sequence[int] = DEFAULT_RESOLUTIONS,
    *,
    t_end: float = 0.2,
    params: Optional[PhysParams] = None,
    mms: Optional[ManufacturedSolution] = None,
    lx: float = 1.0,
    ly: float = 1.0,
    cfl: float = 0.4,
    logger: Optional[logging.Logger] = None,
) -> MmsStudy:
    """
    Spatial refinement study of the forced viscous problem.

    Raises:
        ValidationError: If fewer than two resolutions are given or they do
            not increase.
    """
    log = logger or default_logger
    resolutions = tuple(resolutions)
    if len(resolutions) < 2 or any(a >= b for a, b in zip(resolutions, resolutions[1:])):
        raise ValidationError("resolutions must hold at least two increasing sizes")
    params = params or PhysParams(gamma=1.4, eps=1e-2)
    mms = mms or ManufacturedSolution.trigonometric(lx=lx)

    spacings, per_run = [], []
    for nx in resolutions:
        grid = build_grid(nx, nx + 1, lx, ly)
        errors = run_manufactured(mms, grid, params, t_end, cfl=cfl, logger=log)
        log.info(
            f"MMS nx={nx}: " + ", ".join(f"{name}={value:.3e}" for name, value in errors.items())
        )
        spacings.append(grid.h_max)
        per_run.append(errors)

    return MmsStudy(
        resolutions=resolutions,
        spacings=tuple(spacings),
        errors={name: tuple(run[name] for run in per_run) for name in FIELD_NAMES},
    )
