"""
Prognostic state, physical parameters and pointwise constitutive quantities.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import RegimeError, ValidationError
from .grid_ops import EVEN, ODD, Axis, Grid, diff

FIELD_NAMES = ("rho", "u", "v", "f1", "f2", "f3", "f4")

# Slip-wall symmetry: v, f2 and f3 change sign under y -> -y.
WALL_PARITY = {
    "rho": EVEN,
    "u": EVEN,
    "v": ODD,
    "f1": EVEN,
    "f2": ODD,
    "f3": ODD,
    "f4": EVEN,
}


@dataclass(frozen=True, eq=False)
class StateSnapshot:
    """
    The seven prognostic fields at one time.

    The deformation tensor is F = [[1+f1, f2], [f3, 1+f4]]; the perturbation
    components are stored instead of F. Snapshots are never mutated: every
    operation returns a new one.
    """

    rho: np.ndarray
    u: np.ndarray
    v: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    f4: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        shape = np.shape(self.rho)
        for name in FIELD_NAMES:
            if np.shape(getattr(self, name)) != shape:
                raise ValidationError(
                    f"field {name} has shape {np.shape(getattr(self, name))}, "
                    f"expected {shape}"
                )

    @property
    def shape(self) -> tuple[int, ...]:
        return np.shape(self.rho)

    def fields(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in FIELD_NAMES}

    def replace(self, **changes) -> "StateSnapshot":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_fields(cls, fields: dict[str, np.ndarray], t: float) -> "StateSnapshot":
        return cls(**{name: fields[name] for name in FIELD_NAMES}, t=t)


@dataclass(frozen=True)
class PhysParams:
    """
    Physical parameters of the viscous system.

    Attributes:
        gamma: Adiabatic exponent of p = rho**gamma.
        mu: Shear viscosity coefficient (scaled by eps).
        lam: Second viscosity coefficient (scaled by eps).
        eps: Viscosity scale in [0, 1).
        elastic_coupling: False drops div(rho F F^T) from the momentum
            equation (compressible Navier-Stokes comparison).
        filter_kappa: Fourth-order dissipation coefficient; only ideal runs
            apply it.
    """

    gamma: float = 1.4
    mu: float = 1.0
    lam: float = 0.0
    eps: float = 0.01
    elastic_coupling: bool = True
    filter_kappa: float = 0.01

    def __post_init__(self):
        if not self.gamma >= 1:
            raise ValidationError("gamma must be ≥ 1")
        if not self.mu > 0:
            raise ValidationError("mu must be > 0")
        if not self.mu + self.lam > 0:
            raise ValidationError("mu + lambda must be > 0")
        if not 0 <= self.eps < 1:
            raise ValidationError("eps must satisfy 0 ≤ eps < 1")
        if not self.filter_kappa >= 0:
            raise ValidationError("filter_kappa must be ≥ 0")

    def with_eps(self, eps: float) -> "PhysParams":
        return dataclasses.replace(self, eps=eps)


def uniform_state(grid: Grid) -> StateSnapshot:
    """The equilibrium rho = 1, u = 0, F = I at t = 0."""
    return StateSnapshot(
        rho=np.ones(grid.shape),
        **{name: grid.zeros() for name in FIELD_NAMES[1:]},
        t=0.0,
    )


def check_regime(state: StateSnapshot) -> None:
    """
    Raise if the state left the regime the theory lives in.

    Raises:
        RegimeError: On non-finite values, rho <= 0 or 1 + f4 <= 0.
    """
    for name, field in state.fields().items():
        if not np.all(np.isfinite(field)):
            raise RegimeError(f"non-finite values in {name} at t={state.t}")
    if np.any(state.rho <= 0):
        raise RegimeError(f"density is not positive at t={state.t}")
    if np.any(1.0 + state.f4 <= 0):
        raise RegimeError(f"1 + f4 is not positive at t={state.t}")


def pressure(rho, gamma: float):
    """
    Isentropic pressure p = rho**gamma.

    Raises:
        RegimeError: If the density is not positive somewhere.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise RegimeError("pressure requires positive density")
    result = np.power(rho, gamma)
    return float(result) if result.ndim == 0 else result


def deformation_tensor(state: StateSnapshot) -> np.ndarray:
    """F as an array of shape (2, 2, ny, nx)."""
    return np.array(
        [
            [1.0 + state.f1, state.f2],
            [state.f3, 1.0 + state.f4],
        ]
    )


def elastic_stress(state: StateSnapshot) -> np.ndarray:
    """
    tau = rho F F^T as an array of shape (2, 2, ny, nx).

    tau[0, 1] and tau[1, 0] are bitwise equal.
    """
    F = deformation_tensor(state)
    t11 = F[0, 0] * F[0, 0] + F[0, 1] * F[0, 1]
    t12 = F[0, 0] * F[1, 0] + F[0, 1] * F[1, 1]
    t22 = F[1, 0] * F[1, 0] + F[1, 1] * F[1, 1]
    return state.rho * np.array([[t11, t12], [t12, t22]])


def spectral_norm_2x2(state: StateSnapshot) -> np.ndarray:
    """Largest singular value of F at each node."""
    stacked = np.moveaxis(deformation_tensor(state), (0, 1), (-2, -1))
    return np.linalg.norm(stacked, ord=2, axis=(-2, -1))


def constraint_residuals(
    state: StateSnapshot, grid: Grid
) -> tuple[np.ndarray, np.ndarray]:
    """
    Residuals of rho det F = 1 and div(rho F^T) = 0.

    Returns:
        ``(det_residual, piola_residual)`` with piola_residual of shape
        (2, ny, nx): components d_x(rho(1+f1)) + d_y(rho f3) and
        d_x(rho f2) + d_y(rho(1+f4)).
    """
    rho = state.rho
    det_residual = rho * ((1.0 + state.f1) * (1.0 + state.f4) - state.f2 * state.f3) - 1.0
    piola_residual = np.array(
        [
            diff(rho * (1.0 + state.f1), grid, Axis.X) + diff(rho * state.f3, grid, Axis.Y),
            diff(rho * state.f2, grid, Axis.X) + diff(rho * (1.0 + state.f4), grid, Axis.Y),
        ]
    )
    return det_residual, piola_residual


def vorticity(state: StateSnapshot, grid: Grid) -> np.ndarray:
    """omega = d_y u - d_x v."""
    return diff(state.u, grid, Axis.Y) - diff(state.v, grid, Axis.X)


def sound_speed(rho: np.ndarray, gamma: float) -> np.ndarray:
    """sqrt(p'(rho)) = sqrt(gamma rho**(gamma-1))."""
    return np.sqrt(gamma * np.power(rho, gamma - 1.0))


