"""
Constraint-satisfying initial data near the equilibrium (1, 0, I).

The displacement map Phi(x, y) = (x + sigma a, y + sigma b) is read as the map
from a current position to its reference label. Taking F = (D Phi)^-1 and
rho = det D Phi gives rho det F = 1 pointwise and makes rho F^T the cofactor
matrix of D Phi, whose row divergence vanishes identically, so
div(rho F^T) = 0 holds at the continuum level.

    a(x, y) = sin(k x) eta(y)
    b(x, y) = normal_fraction * cos(k x) eta(y)          k = 2 pi kx / lx

eta is a C-infinity bump supported in [y_center - width, y_center + width],
so a, b and all their y derivatives vanish on the wall and F(x, 0) = I.
"""

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import RegimeError, ValidationError
from .grid_ops import Grid
from .state_model import StateSnapshot, uniform_state

VELOCITY_PROFILES = ("none", "solenoidal", "shear")
REGIME_BOUNDS = (0.5, 1.5)


@dataclass(frozen=True)
class DisplacementSpec:
    """
    Parameters of the initial perturbation.

    Attributes:
        amplitude: Displacement amplitude sigma (the smallness parameter).
        kx: Integer x wavenumber; the physical wavenumber is 2 pi kx / lx.
        y_center: Center of the y bump.
        width: Half width of the y bump; the support must start above the wall.
        normal_fraction: Relative amplitude of the normal displacement b.
        velocity_profile: "none", "solenoidal" or "shear".
        velocity_amplitude: Amplitude of the initial velocity perturbation.
        lx: Period length used to turn kx into a wavenumber; replaced by the
            grid period when data is generated on a grid.
    """

    amplitude: float = 0.01
    kx: int = 1
    y_center: float = 0.5
    width: float = 0.45
    normal_fraction: float = 0.0
    velocity_profile: str = "none"
    velocity_amplitude: float = 0.0
    lx: float = 2.0 * math.pi

    def __post_init__(self):
        if not self.amplitude >= 0:
            raise ValidationError("amplitude must be ≥ 0")
        if isinstance(self.kx, bool) or not isinstance(self.kx, int):
            raise ValidationError("kx must be an integer")
        if not self.width > 0:
            raise ValidationError("width must be > 0")
        if not self.y_center - self.width > 0:
            raise ValidationError("y_center - width must be > 0 (bump must vanish at the wall)")
        if self.velocity_profile not in VELOCITY_PROFILES:
            raise ValidationError(
                f"velocity_profile must be one of {', '.join(VELOCITY_PROFILES)}"
            )
        if not self.velocity_amplitude >= 0:
            raise ValidationError("velocity_amplitude must be ≥ 0")
        if not self.lx > 0:
            raise ValidationError("lx must be > 0")

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi * self.kx / self.lx

    @property
    def support_top(self) -> float:
        return self.y_center + self.width


def bump(y, y_center: float, width: float) -> tuple[np.ndarray, np.ndarray]:
    """
    eta(y) = exp(1 - 1/(1 - s^2)) for |s| < 1, s = (y - y_center)/width, and
    its derivative. eta peaks at 1 and is zero outside the support.
    """
    y = np.asarray(y, dtype=float)
    s = (y - y_center) / width
    inside = np.abs(s) < 1.0
    q = np.where(inside, np.maximum(1.0 - s * s, 1e-12), 1.0)
    eta = np.where(inside, np.exp(1.0 - 1.0 / q), 0.0)
    deta = np.where(inside, eta * (-2.0 * s / (q * q)) / width, 0.0)
    return eta, deta


def displacement_map(spec: DisplacementSpec, x, y) -> tuple[np.ndarray, np.ndarray]:
    """
    Evaluate Phi and its exact Jacobian.

    Args:
        spec: The displacement parameters.
        x, y: Scalars or equally shaped arrays.

    Returns:
        ``(phi, jacobian)`` with ``phi`` of shape (2, ...) and ``jacobian`` of
        shape (2, 2, ...), ``jacobian[i, j] = d Phi_i / d x_j``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sigma, k, beta = spec.amplitude, spec.wavenumber, spec.normal_fraction
    eta, deta = bump(y, spec.y_center, spec.width)
    sin_kx, cos_kx = np.sin(k * x), np.cos(k * x)

    a, a_x, a_y = sin_kx * eta, k * cos_kx * eta, sin_kx * deta
    b, b_x, b_y = beta * cos_kx * eta, -beta * k * sin_kx * eta, beta * cos_kx * deta

    phi = np.array([x + sigma * a, y + sigma * b])
    jacobian = np.array(
        [
            [1.0 + sigma * a_x, sigma * a_y],
            [sigma * b_x, 1.0 + sigma * b_y],
        ]
    )
    return phi, jacobian


def initial_velocity(spec: DisplacementSpec, x: np.ndarray, y: np.ndarray):
    """
    Velocity perturbation vanishing on the wall.

    solenoidal: (u, v) = (d_y psi, -d_x psi) with psi = A sin(k x) eta(y).
    shear: u = A eta(y) (1 + cos k x)/2, v = 0.
    """
    amp, k = spec.velocity_amplitude, spec.wavenumber
    eta, deta = bump(y, spec.y_center, spec.width)
    if spec.velocity_profile == "solenoidal":
        return amp * np.sin(k * x) * deta, -amp * k * np.cos(k * x) * eta
    if spec.velocity_profile == "shear":
        return amp * eta * 0.5 * (1.0 + np.cos(k * x)), np.zeros_like(x)
    return np.zeros_like(x), np.zeros_like(x)


def piola_initial_data(grid: Grid, spec: DisplacementSpec) -> StateSnapshot:
    """
    Generate initial data with rho det F = 1 and div(rho F^T) = 0.

    Raises:
        ValidationError: If the bump does not fit below the top of the strip.
        RegimeError: If det D Phi is not positive somewhere, or rho or 1 + f4
            leave (1/2, 3/2).
    """
    spec = dataclasses.replace(spec, lx=grid.lx)
    if spec.support_top >= grid.ly:
        raise ValidationError("y_center + width must lie below the top of the strip")
    if spec.amplitude == 0 and spec.velocity_amplitude == 0:
        return uniform_state(grid)

    X, Y = grid.mesh()
    _, jac = displacement_map(spec, X, Y)
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    if np.any(det <= 0):
        raise RegimeError("displacement Jacobian is degenerate; lower the amplitude")

    # F = (D Phi)^-1, rho = det D Phi
    f1 = jac[1, 1] / det - 1.0
    f2 = -jac[0, 1] / det
    f3 = -jac[1, 0] / det
    f4 = jac[0, 0] / det - 1.0
    rho = det

    low, high = REGIME_BOUNDS
    for name, field in (("rho", rho), ("1 + f4", 1.0 + f4)):
        if np.any(field <= low) or np.any(field >= high):
            raise RegimeError(f"{name} leaves ({low}, {high}); lower the amplitude")

    u, v = initial_velocity(spec, X, Y)
    return StateSnapshot(rho=rho, u=u, v=v, f1=f1, f2=f2, f3=f3, f4=f4, t=0.0)
