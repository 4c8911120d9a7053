"""
Unit tests for norms, energy and identity residuals.
"""

import math

import numpy as np
import pytest

from viscoelastic_lab.diagnostics import (
    NormReport,
    TrajectoryAccumulator,
    conormal_norm,
    energy_nm,
    l2_norm_squared,
    q_norm,
    recovery_residuals,
    sample_report,
    wall_layer_indicator,
)
from viscoelastic_lab.errors import RegimeError, ValidationError
from viscoelastic_lab.grid_ops import build_grid
from viscoelastic_lab.initdata import DisplacementSpec, piola_initial_data
from viscoelastic_lab.state_model import PhysParams, StateSnapshot, uniform_state


def _field_state(grid, values):
    return uniform_state(grid).replace(u=values)


class TestConormalNorm:
    """Tests for conormal_norm."""

    def test_order_zero_is_l2(self, small_grid, random_state):
        """Test that m = 0 is the plain discrete L2 norm."""
        expected = math.sqrt(l2_norm_squared(random_state.u, small_grid))
        assert conormal_norm([random_state], small_grid, "u", 0) == pytest.approx(expected)

    def test_l2_of_constant(self, small_grid):
        """Test the quadrature: ||1||^2 = lx * ly."""
        ones = np.ones(small_grid.shape)
        assert l2_norm_squared(ones, small_grid) == pytest.approx(
            small_grid.lx * small_grid.ly, rel=1e-12
        )

    def test_homogeneity_and_triangle(self, small_grid):
        """Test the norm axioms on random field pairs."""
        rng = np.random.default_rng(42)
        for _ in range(100):
            f, g = rng.standard_normal((2,) + small_grid.shape)
            c = rng.uniform(-3.0, 3.0)
            norm_f = conormal_norm([_field_state(small_grid, f)], small_grid, "u", 2)
            norm_g = conormal_norm([_field_state(small_grid, g)], small_grid, "u", 2)
            norm_cf = conormal_norm([_field_state(small_grid, c * f)], small_grid, "u", 2)
            norm_sum = conormal_norm([_field_state(small_grid, f + g)], small_grid, "u", 2)
            assert norm_cf == pytest.approx(abs(c) * norm_f, rel=1e-10)
            assert norm_sum <= (norm_f + norm_g) * (1.0 + 1e-10)

    def test_monotone_in_order(self, random_state, small_grid):
        """Test ||f||_m <= ||f||_{m+1}."""
        norms = [conormal_norm([random_state], small_grid, "f2", m) for m in range(3)]
        assert norms[0] <= norms[1] <= norms[2]

    def test_equilibrium_is_zero(self, uniform, small_grid):
        """Test that the perturbation norms of the equilibrium vanish."""
        for name in ("u", "v", "f1", "f4"):
            assert conormal_norm([uniform], small_grid, name, 2) == 0.0
        assert conormal_norm([uniform], small_grid, lambda s: s.rho - 1.0, 2) == 0.0

    def test_order_above_max(self, uniform, small_grid):
        """Test that m above the configured maximum is rejected."""
        with pytest.raises(ValidationError):
            conormal_norm([uniform], small_grid, "u", 3)

    def test_time_needs_history(self, uniform, small_grid):
        """Test that Z0 with too short a history is rejected."""
        with pytest.raises(ValidationError):
            conormal_norm([uniform], small_grid, "u", 2, include_time=True)

    def test_time_derivative_enters(self, small_grid):
        """Test that a field growing in time has a larger norm with Z0."""
        X, Y = small_grid.mesh()
        g = np.sin(X) * Y
        history = [_field_state(small_grid, 0.1 * k * g).replace(t=0.1 * k) for k in range(1, 4)]
        spatial = conormal_norm(history, small_grid, "u", 1)
        full = conormal_norm(history, small_grid, "u", 1, include_time=True)
        assert full > spatial


class TestEnergyNm:
    """Tests for the energy proxy."""

    def test_equilibrium(self, uniform, small_grid, default_params):
        """Test that the equilibrium has zero energy."""
        accumulator = TrajectoryAccumulator()
        for k in range(3):
            energy = energy_nm(
                [uniform.replace(t=0.1 * k)], small_grid, default_params, 2, accumulator
            )
            assert energy.total == 0.0

    def test_terms_nonnegative(self, piola_state, small_grid, default_params):
        """Test that every addend is nonnegative and the state term dominates at t = 0."""
        energy = energy_nm([piola_state], small_grid, default_params, 2, TrajectoryAccumulator())
        assert all(value >= 0.0 for value in energy.terms.values())
        assert energy.terms["state"] > 0.0
        assert energy.terms["int_dy"] == 0.0

    def test_eps_weighting(self, piola_state, small_grid):
        """Test that eps scales the viscous addends linearly."""
        small = energy_nm([piola_state], small_grid, PhysParams(eps=0.01), 2)
        large = energy_nm([piola_state], small_grid, PhysParams(eps=0.02), 2)
        assert large.terms["eps_dy_rho_f2"] == pytest.approx(2.0 * small.terms["eps_dy_rho_f2"])
        assert large.terms["state"] == small.terms["state"]


class TestAccumulator:
    """Tests for TrajectoryAccumulator."""

    def test_trapezoid(self):
        """Test the running trapezoid integral."""
        accumulator = TrajectoryAccumulator()
        accumulator.integrate(0.0, {"a": 1.0})
        assert accumulator.integrate(1.0, {"a": 3.0})["a"] == pytest.approx(2.0)
        assert accumulator.integrate(1.5, {"a": 3.0})["a"] == pytest.approx(3.5)

    def test_running_supremum(self):
        """Test that Q only grows."""
        accumulator = TrajectoryAccumulator()
        accumulator.update_q(2.0)
        assert accumulator.update_q(1.0) == 2.0

    def test_time_must_advance(self):
        """Test that stale samples are rejected."""
        accumulator = TrajectoryAccumulator()
        accumulator.integrate(1.0, {"a": 1.0})
        with pytest.raises(ValidationError):
            accumulator.integrate(1.0, {"a": 1.0})


class TestQNorm:
    """Tests for q_norm."""

    def test_equilibrium(self, uniform, small_grid):
        """Test Q = 0 at rest."""
        assert q_norm([uniform], small_grid) == pytest.approx(0.0, abs=1e-14)

    def test_constant_pressure_offset(self, small_grid):
        """Test Q = 0.1 for a uniform state with p - 1 = 0.1."""
        gamma = 1.4
        rho = np.full(small_grid.shape, 1.1 ** (1.0 / gamma))
        state = uniform_state(small_grid).replace(rho=rho)
        assert q_norm([state], small_grid, PhysParams(gamma=gamma)) == pytest.approx(0.1, rel=1e-12)

    def test_supremum_over_history(self, uniform, small_grid, random_state):
        """Test that Q takes the largest value along the history."""
        later = random_state.replace(t=1.0)
        assert q_norm([uniform, later], small_grid) == q_norm([later], small_grid)


class TestRecoveryResiduals:
    """Tests for the normal-derivative recovery identities."""

    def test_identity_state(self, uniform, small_grid):
        """Test that every residual vanishes at rest."""
        residuals = recovery_residuals(uniform, small_grid).sup_norms()
        assert all(value == 0.0 for value in residuals.values())

    def test_velocity_identities_second_order(self):
        """Test that the d_y v and d_y u residuals shrink at second order on smooth data."""
        sups = []
        for nx in (32, 64):
            grid = build_grid(nx, nx + 1, 2.0 * math.pi, 2.0)
            X, Y = grid.mesh()
            state = StateSnapshot(
                rho=1.0 + 0.05 * np.cos(X) * np.sin(Y),
                u=0.05 * np.sin(X) * np.sin(Y),
                v=0.05 * np.cos(X) * Y * np.exp(-Y),
                f1=0.02 * np.sin(X + Y),
                f2=0.03 * np.cos(X) * np.cos(Y),
                f3=0.02 * np.sin(X) * Y,
                f4=0.04 * np.sin(X) * np.cos(Y),
            )
            residuals = recovery_residuals(state, grid).sup_norms()
            sups.append((residuals["dyv"], residuals["dyu"]))
        for coarse, fine in zip(sups[0], sups[1]):
            assert coarse / fine >= 3.5

    def test_constraint_identities_on_piola_data(self):
        """Test that d_y f3, d_y f4 and d_y f1 residuals vanish at second order."""
        spec = DisplacementSpec(amplitude=0.05, normal_fraction=0.5)
        sups = []
        for nx in (32, 64, 128):
            grid = build_grid(nx, nx + 1, 2.0 * math.pi, 2.0)
            residuals = recovery_residuals(piola_initial_data(grid, spec), grid).sup_norms()
            sups.append(residuals)
        for name in ("dyf3", "dyf4", "dyf1"):
            assert sups[1][name] / sups[2][name] >= 3.5

    def test_degenerate_f4(self, uniform, small_grid):
        """Test that 1 + f4 <= 0 is refused."""
        with pytest.raises(RegimeError):
            recovery_residuals(uniform.replace(f4=-uniform.rho), small_grid)


class TestWallLayerIndicator:
    """Tests for wall_layer_indicator."""

    def test_shear(self):
        """Test max |d_y u(x, 0)| = 1 for u = sin y."""
        grid = build_grid(16, 65, 2.0 * math.pi, 2.0)
        _, Y = grid.mesh()
        state = uniform_state(grid).replace(u=np.sin(Y))
        assert wall_layer_indicator(state, grid) == pytest.approx(1.0, abs=1e-3)


class TestSampleReport:
    """Tests for sample_report."""

    def test_row_matches_columns(self, piola_state, small_grid, default_params):
        """Test that the flat row follows the column order."""
        report = sample_report(
            [piola_state], small_grid, default_params, TrajectoryAccumulator(), m=2
        )
        assert isinstance(report, NormReport)
        assert list(report.as_row()) == NormReport.columns(2)
        assert report.time_derivatives is False
        assert report.det_res < 1e-13
        assert report.wall_f3_trace == 0.0
        assert len(report.norms["F"]) == 3
