"""
Semi-discrete right-hand sides of the viscous system and its ideal limit.

The equations are discretized in primitive, non-conservative form:

    d_t rho = -div(rho u)
    d_t u   = [-rho (u.grad) u + div(rho F F^T) - grad p
               + eps mu lap u + eps (mu + lambda) grad div u] / rho
    d_t F   = -(u.grad) F + (grad u) F

with the transport of F written componentwise as

    d_t f1 = -u.grad f1 + (1+f1) d_x u + f3 d_y u
    d_t f2 = -u.grad f2 + f2 d_x u + (1+f4) d_y u
    d_t f3 = -u.grad f3 + (1+f1) d_x v + f3 d_y v
    d_t f4 = -u.grad f4 + f2 d_x v + (1+f4) d_y v
"""

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid_ops import EVEN, ODD, Axis, Grid, diff, laplacian
from .state_model import (
    FIELD_NAMES,
    WALL_PARITY,
    PhysParams,
    StateSnapshot,
    check_regime,
    elastic_stress,
    pressure,
)

TENDENCY_NAMES = tuple(f"d_{name}" for name in FIELD_NAMES)


@dataclass(frozen=True, eq=False)
class Tendency:
    """Time derivatives of the seven prognostic fields."""

    d_rho: np.ndarray
    d_u: np.ndarray
    d_v: np.ndarray
    d_f1: np.ndarray
    d_f2: np.ndarray
    d_f3: np.ndarray
    d_f4: np.ndarray

    def fields(self) -> dict[str, np.ndarray]:
        """Tendencies keyed by the prognostic field they drive."""
        return {name: getattr(self, f"d_{name}") for name in FIELD_NAMES}

    @classmethod
    def from_fields(cls, fields: dict[str, np.ndarray]) -> "Tendency":
        return cls(**{f"d_{name}": fields[name] for name in FIELD_NAMES})

    @classmethod
    def zeros(cls, grid: Grid) -> "Tendency":
        return cls(**{name: grid.zeros() for name in TENDENCY_NAMES})

    def __add__(self, other: "Tendency") -> "Tendency":
        mine, theirs = self.fields(), other.fields()
        return Tendency.from_fields({name: mine[name] + theirs[name] for name in mine})

    def __sub__(self, other: "Tendency") -> "Tendency":
        mine, theirs = self.fields(), other.fields()
        return Tendency.from_fields({name: mine[name] - theirs[name] for name in mine})


def rhs_viscous(state: StateSnapshot, grid: Grid, params: PhysParams) -> Tendency:
    """
    Tendency of the viscous system at a state.

    With eps > 0 the wall and top rows are evaluated with the one-sided
    stencils of ``diff``; the boundary closure overwrites whatever it
    prescribes afterwards. With eps = 0 only v is prescribed on the wall and
    wall-row y derivatives go through the mirror image of the slip-wall
    symmetry (``WALL_PARITY``; p and the diagonal stress are even, rho v and
    the off-diagonal stress odd).

    Raises:
        RegimeError: If the state violates the regime guard.
    """
    check_regime(state)
    rho, u, v = state.rho, state.u, state.v
    f1, f2, f3, f4 = state.f1, state.f2, state.f3, state.f4
    reflect = params.eps == 0

    def dx(field):
        return diff(field, grid, Axis.X)

    def dy(field, parity):
        return diff(field, grid, Axis.Y, wall_parity=parity if reflect else None)

    def advection(name):
        field = getattr(state, name)
        return -(u * dx(field) + v * dy(field, WALL_PARITY[name]))

    ux, uy, vx, vy = dx(u), dy(u, EVEN), dx(v), dy(v, ODD)

    d_rho = -(dx(rho * u) + dy(rho * v, ODD))

    p = pressure(rho, params.gamma)
    mom_x = -rho * (u * ux + v * uy) - dx(p)
    mom_y = -rho * (u * vx + v * vy) - dy(p, EVEN)
    if params.elastic_coupling:
        tau = elastic_stress(state)
        mom_x = mom_x + dx(tau[0, 0]) + dy(tau[0, 1], ODD)
        mom_y = mom_y + dx(tau[1, 0]) + dy(tau[1, 1], EVEN)
    if params.eps > 0:
        div_u = ux + vy
        mom_x = mom_x + params.eps * (
            params.mu * laplacian(u, grid) + (params.mu + params.lam) * dx(div_u)
        )
        mom_y = mom_y + params.eps * (
            params.mu * laplacian(v, grid) + (params.mu + params.lam) * dy(div_u, EVEN)
        )

    return Tendency(
        d_rho=d_rho,
        d_u=mom_x / rho,
        d_v=mom_y / rho,
        d_f1=advection("f1") + (1.0 + f1) * ux + f3 * uy,
        d_f2=advection("f2") + f2 * ux + (1.0 + f4) * uy,
        d_f3=advection("f3") + (1.0 + f1) * vx + f3 * vy,
        d_f4=advection("f4") + f2 * vx + (1.0 + f4) * vy,
    )


def undivided_fourth_difference(
    field: np.ndarray, wall_parity: Optional[int] = None
) -> np.ndarray:
    """
    delta_x^4 + delta_y^4 of a field, without the h^4 scaling.

    x is periodic; in y the stencil is applied where it fits (rows 2 to
    ny-3). With ``wall_parity`` rows 0 and 1 also get it through the mirror
    ghost rows f(-k dy) = parity * f(k dy); otherwise the two outermost rows
    on each side get no y dissipation.
    """
    result = (
        np.roll(field, -2, axis=1)
        - 4.0 * np.roll(field, -1, axis=1)
        + 6.0 * field
        - 4.0 * np.roll(field, 1, axis=1)
        + np.roll(field, 2, axis=1)
    )
    result[2:-2] += (
        field[4:] - 4.0 * field[3:-1] + 6.0 * field[2:-2] - 4.0 * field[1:-3] + field[:-4]
    )
    if wall_parity is not None:
        result[0] += (1 + wall_parity) * (field[2] - 4.0 * field[1]) + 6.0 * field[0]
        result[1] += field[3] - 4.0 * field[2] + (6.0 + wall_parity) * field[1] - 4.0 * field[0]
    return result


def dissipation_filter(state: StateSnapshot, kappa: float) -> Tendency:
    """
    -kappa h^4 (d_x^4 + d_y^4) applied to every field.

    The wall rows are filtered through the slip-wall mirror image, so odd
    fields that vanish on the wall keep vanishing there.
    """
    return Tendency.from_fields(
        {
            name: -kappa * undivided_fourth_difference(field, WALL_PARITY[name])
            for name, field in state.fields().items()
        }
    )


def rhs_ideal(state: StateSnapshot, grid: Grid, params: PhysParams) -> Tendency:
    """
    Tendency of the ideal elastodynamic system (eps = 0).

    Identical to ``rhs_viscous`` with eps = 0 when ``params.filter_kappa`` is
    0; otherwise the fourth-order dissipation filter is added.
    """
    tendency = rhs_viscous(state, grid, dataclasses.replace(params, eps=0.0))
    if params.filter_kappa > 0:
        tendency = tendency + dissipation_filter(state, params.filter_kappa)
    return tendency
