"""
Domain closure: no-slip wall at y = 0, periodic x, truncated far field.
"""

import math
from dataclasses import dataclass
from enum import StrEnum
from typing import Optional

import numpy as np

from .grid_ops import Grid
from .state_model import StateSnapshot

SPONGE_FRACTION = 0.1
DEFAULT_SPONGE_RATE = 5.0

# Relaxed toward 0 in the sponge; rho follows from rho det F = 1.
_RELAXED = ("u", "v", "f1", "f2", "f3", "f4")


class BcMode(StrEnum):
    VISCOUS = "viscous"
    IDEAL = "ideal"
    NS_COMPARE = "ns_compare"


@dataclass(frozen=True)
class WallTraces:
    """Sup over the wall row of |u| and |f3|."""

    u: float
    f3: float


def sponge_rows(grid: Grid) -> int:
    """Number of rows in the top sponge band (10% of the rows, at least one)."""
    return max(1, math.ceil(SPONGE_FRACTION * grid.ny))


def sponge_profile(grid: Grid) -> np.ndarray:
    """Relaxation weight per row: 0 below the band, quadratic ramp to 1 at the top."""
    band = sponge_rows(grid)
    weight = np.zeros(grid.ny)
    ramp = np.arange(1, band + 1) / band
    weight[grid.ny - band :] = ramp**2
    return weight[:, np.newaxis]


def physical_rows(grid: Grid) -> slice:
    """Rows below the sponge band, the region the constraint diagnostics cover."""
    return slice(0, grid.ny - sponge_rows(grid))


def enforce_boundaries(
    state: StateSnapshot,
    grid: Grid,
    mode: BcMode,
    *,
    dt: float = 0.0,
    sponge_rate: float = DEFAULT_SPONGE_RATE,
    far_field: Optional[StateSnapshot] = None,
    constrained: Optional[bool] = None,
) -> StateSnapshot:
    """
    Return a copy of the state with the boundary conditions imposed.

    viscous / ns_compare set u = v = 0 on the wall row; ideal sets only v = 0.
    No condition is imposed on f1..f4 at the wall. The top row is copied from
    the row below it and, when ``dt > 0``, the top band relaxes toward the
    uniform state: u, v and f1..f4 by the factor exp(-sponge_rate * w(y) * dt),
    after which rho = 1 / det F there. Unconstrained runs (by default the
    ns_compare mode, whose F is not tied to rho) relax rho toward 1 by the
    same factor instead. A ``far_field`` snapshot replaces both with Dirichlet
    data on the top row.

    The projection with ``dt = 0`` is idempotent.
    """
    mode = BcMode(mode)
    if constrained is None:
        constrained = mode is not BcMode.NS_COMPARE
    fields = {name: field.copy() for name, field in state.fields().items()}

    fields["v"][0] = 0.0
    if mode is not BcMode.IDEAL:
        fields["u"][0] = 0.0

    if far_field is not None:
        for name, field in far_field.fields().items():
            fields[name][-1] = field[-1]
    else:
        for field in fields.values():
            field[-1] = field[-2]
        if dt > 0 and sponge_rate > 0:
            band = sponge_rows(grid)
            damping = np.exp(-sponge_rate * sponge_profile(grid)[-band:] * dt)
            for name in _RELAXED:
                fields[name][-band:] *= damping
            if constrained:
                f1, f2, f3, f4 = (fields[name][-band:] for name in ("f1", "f2", "f3", "f4"))
                fields["rho"][-band:] = 1.0 / ((1.0 + f1) * (1.0 + f4) - f2 * f3)
            else:
                fields["rho"][-band:] = 1.0 + (fields["rho"][-band:] - 1.0) * damping

    return StateSnapshot.from_fields(fields, t=state.t)


def wall_traces(state: StateSnapshot) -> WallTraces:
    """max_x |u(x, 0)| and max_x |f3(x, 0)|."""
    return WallTraces(
        u=float(np.max(np.abs(state.u[0]))),
        f3=float(np.max(np.abs(state.f3[0]))),
    )
