"""
Discrete half-plane strip and its derivative operators.

Fields are stored as ``(ny, nx)`` arrays: row ``j`` sits at ``y_j = j*dy`` with
row 0 on the wall, column ``i`` at ``x_i = i*dx`` with x periodic.
"""

import math
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass
from enum import StrEnum
from functools import cached_property
from operator import attrgetter
from typing import Optional

import numpy as np

from .errors import ValidationError

MIN_CELLS = 4
SPACING_TOLERANCE = 1e-12

# Parity of a field under the reflection y -> -y about the wall.
EVEN = 1
ODD = -1


class Axis(StrEnum):
    X = "x"
    Y = "y"


@dataclass(frozen=True)
class Grid:
    """
    Uniform collocated grid on the strip [0, lx) x [0, ly].

    Attributes:
        nx: Cell count in the periodic x direction.
        ny: Node count in y, including the wall row and the top row.
        lx: Period length in x.
        ly: Strip height.
    """

    nx: int
    ny: int
    lx: float
    ly: float

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / (self.ny - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def h(self) -> float:
        """Smallest spacing, used by time step bounds."""
        return min(self.dx, self.dy)

    @property
    def h_max(self) -> float:
        """Largest spacing, used by error tolerances."""
        return max(self.dx, self.dy)

    @cached_property
    def x_coords(self) -> np.ndarray:
        return np.arange(self.nx) * self.dx

    @cached_property
    def y_coords(self) -> np.ndarray:
        return np.arange(self.ny) * self.dy

    @cached_property
    def phi(self) -> np.ndarray:
        """Conormal weight sampled on the y rows, shaped to broadcast over x."""
        return weight_phi(self.y_coords)[:, np.newaxis]

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Return fresh ``(X, Y)`` coordinate arrays of shape ``(ny, nx)``."""
        return np.meshgrid(self.x_coords, self.y_coords)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)


def build_grid(nx: int, ny: int, lx: float, ly: float) -> Grid:
    """
    Build the strip grid.

    Args:
        nx: Cell count in x (at least 4).
        ny: Node count in y (at least 4).
        lx: Period length in x, positive.
        ly: Strip height, positive.

    Returns:
        The grid.

    Raises:
        ValidationError: If a count is below the stencil width or an extent
            is not positive.
    """
    for name, count in (("nx", nx), ("ny", ny)):
        if isinstance(count, bool) or not isinstance(count, (int, np.integer)):
            raise ValidationError(f"{name} must be an integer, got {count!r}")
        if count < MIN_CELLS:
            raise ValidationError(f"{name} must be >= {MIN_CELLS}, got {count}")
    for name, extent in (("lx", lx), ("ly", ly)):
        if not math.isfinite(extent) or extent <= 0:
            raise ValidationError(f"nonpositive extent: {name} = {extent}")
    return Grid(int(nx), int(ny), float(lx), float(ly))


def weight_phi(y):
    """
    Conormal weight phi(y) = y / (1 + y).

    phi(0) = 0, phi'(0) = 1 and every derivative is bounded on y >= 0.

    Raises:
        ValidationError: If any y is negative.
    """
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0):
        raise ValidationError("weight_phi is defined for y >= 0 only")
    result = y_arr / (1.0 + y_arr)
    return float(result) if result.ndim == 0 else result


def _check_shape(field: np.ndarray, grid: Grid) -> np.ndarray:
    field = np.asarray(field, dtype=float)
    if field.shape != grid.shape:
        raise ValidationError(
            f"field shape {field.shape} does not match grid shape {grid.shape}"
        )
    return field


def diff(
    field: np.ndarray,
    grid: Grid,
    axis,
    conormal: bool = False,
    wall_parity: Optional[int] = None,
) -> np.ndarray:
    """
    Second-order first derivative of a field.

    x is periodic with central differences. y uses central differences in the
    interior and one-sided second-order differences on the wall and top rows.
    With ``wall_parity`` (EVEN or ODD) the wall row is instead a central
    difference through the mirror ghost row f(-dy) = parity * f(dy).
    With ``conormal=True`` the y derivative becomes Z2 = phi(y) d/dy, which is
    exactly zero on the wall row; the x derivative is unchanged (Z1 = d/dx).
    """
    field = _check_shape(field, grid)
    axis = Axis(axis)
    if axis is Axis.X:
        return (np.roll(field, -1, axis=1) - np.roll(field, 1, axis=1)) / (2.0 * grid.dx)
    result = np.gradient(field, grid.dy, axis=0, edge_order=2)
    if wall_parity is not None:
        result[0] = (1 - wall_parity) * field[1] / (2.0 * grid.dy)
    if conormal:
        result = grid.phi * result
    return result


def diff2(field: np.ndarray, grid: Grid, axis) -> np.ndarray:
    """Second-order accurate second derivative along one axis."""
    field = _check_shape(field, grid)
    axis = Axis(axis)
    if axis is Axis.X:
        return (
            np.roll(field, -1, axis=1) - 2.0 * field + np.roll(field, 1, axis=1)
        ) / grid.dx**2
    result = np.empty_like(field)
    result[1:-1] = field[2:] - 2.0 * field[1:-1] + field[:-2]
    result[0] = 2.0 * field[0] - 5.0 * field[1] + 4.0 * field[2] - field[3]
    result[-1] = 2.0 * field[-1] - 5.0 * field[-2] + 4.0 * field[-3] - field[-4]
    return result / grid.dy**2


def laplacian(field: np.ndarray, grid: Grid) -> np.ndarray:
    return diff2(field, grid, Axis.X) + diff2(field, grid, Axis.Y)


@dataclass(frozen=True)
class MultiIndex:
    """Conormal multi-index addressing Z0^a0 Z1^a1 Z2^a2."""

    a0: int = 0
    a1: int = 0
    a2: int = 0

    def __post_init__(self):
        for name in ("a0", "a1", "a2"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ValidationError(f"{name} must be a nonnegative integer")

    @property
    def order(self) -> int:
        return self.a0 + self.a1 + self.a2

    @staticmethod
    def up_to(m: int, include_time: bool = False) -> Iterator["MultiIndex"]:
        """Every multi-index with order <= m; a0 stays 0 unless include_time."""
        for total in range(m + 1):
            for a0 in range(total + 1 if include_time else 1):
                for a1 in range(total - a0 + 1):
                    yield MultiIndex(a0, a1, total - a0 - a1)


FieldSelector = str | Callable[[object], np.ndarray]


def resolve_selector(field_selector: FieldSelector) -> Callable[[object], np.ndarray]:
    """Turn a field name into an accessor; callables pass through."""
    if isinstance(field_selector, str):
        return attrgetter(field_selector)
    return field_selector


def check_uniform_spacing(times: Sequence[float]) -> float:
    """
    Return the common spacing of a time sequence.

    Raises:
        ValidationError: If times do not strictly increase or spacings differ
            by more than the relative tolerance.
    """
    steps = np.diff(np.asarray(times, dtype=float))
    if steps.size == 0:
        return 0.0
    if np.any(steps <= 0):
        raise ValidationError("snapshot times must be strictly increasing")
    reference = steps[0]
    if np.any(np.abs(steps - reference) > SPACING_TOLERANCE * abs(reference)):
        raise ValidationError("snapshot spacing is not uniform")
    return float(reference)


def apply_conormal_multiindex(
    history: Sequence,
    grid: Grid,
    alpha: MultiIndex,
    field_selector: FieldSelector,
) -> np.ndarray:
    """
    Evaluate Z^alpha of a field at the newest snapshot of a history.

    The spatial part Z1^a1 Z2^a2 is applied to each snapshot that is needed,
    then Z0^a0 is the a0-th backward difference over the newest a0+1 snapshots.

    Args:
        history: Time-ordered snapshots (anything with a ``t`` attribute that
            the selector understands), newest last.
        grid: The grid the fields live on.
        alpha: The multi-index.
        field_selector: Field name or callable extracting a field.

    Raises:
        ValidationError: If the history is too short for a0 or unevenly spaced.
    """
    select = resolve_selector(field_selector)
    depth = alpha.a0 + 1
    if len(history) < depth:
        raise ValidationError(
            f"history of depth {len(history)} cannot supply Z0^{alpha.a0}"
        )
    window = [history[k] for k in range(len(history) - depth, len(history))]

    def spatial(snapshot) -> np.ndarray:
        field = _check_shape(select(snapshot), grid)
        for _ in range(alpha.a2):
            field = diff(field, grid, Axis.Y, conormal=True)
        for _ in range(alpha.a1):
            field = diff(field, grid, Axis.X)
        return field

    if alpha.a0 == 0:
        return spatial(window[-1])

    dt = check_uniform_spacing([snapshot.t for snapshot in window])
    result = np.zeros(grid.shape)
    for k, snapshot in enumerate(reversed(window)):
        result += (-1) ** k * math.comb(alpha.a0, k) * spatial(snapshot)
    return result / dt**alpha.a0
