"""
Unit tests for the viscosity sweep and rate fitting.
"""

import math

import numpy as np
import pytest

from viscoelastic_lab import sweep
from viscoelastic_lab.boundary import BcMode
from viscoelastic_lab.dynamics import rhs_viscous
from viscoelastic_lab.errors import StabilityError, ValidationError
from viscoelastic_lab.initdata import DisplacementSpec
from viscoelastic_lab.state_model import PhysParams, StateSnapshot, uniform_state
from viscoelastic_lab.sweep import (
    ComparisonReport,
    SampleStore,
    SweepPlan,
    fit_rate,
    frozen_deformation,
    run_inviscid_limit_sweep,
    shared_dt,
)
from viscoelastic_lab.timeint import OutputPolicy, cfl_dt, run_simulation


@pytest.fixture
def rest_plan(tiny_grid):
    """A two-member plan starting from the equilibrium."""
    return SweepPlan(
        eps_list=(0.05, 0.025),
        grid=tiny_grid,
        spec=DisplacementSpec(amplitude=0.0),
        t_end=0.05,
        sample_interval=2,
    )


class TestFitRate:
    """Tests for fit_rate."""

    def test_linear(self):
        """Test slope 1 for err = eps."""
        assert fit_rate([(1e-2, 1e-2), (1e-3, 1e-3)]) == pytest.approx(1.0, abs=1e-12)

    def test_square_root(self):
        """Test slope 1/2 for err = sqrt(eps)."""
        pairs = [(eps, math.sqrt(eps)) for eps in (1e-2, 1e-4)]
        assert fit_rate(pairs) == pytest.approx(0.5, abs=1e-12)

    def test_noisy(self):
        """Test that one-percent noise around eps^0.7 stays within 0.05."""
        rng = np.random.default_rng(7)
        eps = np.geomspace(1e-2, 1e-4, 6)
        err = 3.0 * eps**0.7 * (1.0 + 0.01 * rng.uniform(-1.0, 1.0, eps.size))
        assert fit_rate(zip(eps, err)) == pytest.approx(0.7, abs=0.05)

    def test_too_few(self):
        """Test that a single pair is rejected."""
        with pytest.raises(ValidationError):
            fit_rate([(0.1, 0.1)])

    def test_nonpositive(self):
        """Test that a zero error is rejected."""
        with pytest.raises(ValidationError):
            fit_rate([(0.1, 0.0), (0.01, 0.1)])


class TestSweepPlan:
    """Tests for SweepPlan validation."""

    @pytest.mark.parametrize(
        "eps_list",
        [(), (0.01, 0.02), (0.01, 0.01), (0.0,), (1.5, 0.1), (0.1, -0.1)],
    )
    def test_bad_eps_list(self, tiny_grid, eps_list):
        """Test that eps_list must be non-empty, in (0, 1) and strictly decreasing."""
        with pytest.raises(ValidationError, match="eps_list"):
            SweepPlan(eps_list=eps_list, grid=tiny_grid)

    def test_needs_grid(self):
        """Test that a plan without a grid is rejected."""
        with pytest.raises(ValidationError, match="grid"):
            SweepPlan()

    def test_with_coupling(self, rest_plan):
        """Test that with_coupling only flips the coupling flag."""
        off = rest_plan.with_coupling(False)
        assert off.params.elastic_coupling is False
        assert off.params.gamma == rest_plan.params.gamma
        assert off.eps_list == rest_plan.eps_list

    def test_shared_dt_covers_members(self, rest_plan, tiny_grid):
        """Test that the shared step is no larger than any member's bound."""
        initial = uniform_state(tiny_grid)
        dt = shared_dt(rest_plan, initial)
        for eps in (0.0,) + rest_plan.eps_list:
            assert dt <= cfl_dt(initial, tiny_grid, PhysParams(eps=eps), rest_plan.cfl)


class TestSampleStore:
    """Tests for the DuckDB sample table."""

    def test_peaks(self):
        """Test that peaks are the per-eps maxima ordered by decreasing eps."""
        store = SampleStore()
        try:
            store.insert(
                [
                    {"eps": 0.01, "step": 0, "t": 0.0, "err_sup": 0.0, "dy_err_sup": 0.0,
                     "wall_layer": 1.0, "nm_proxy": 2.0},
                    {"eps": 0.01, "step": 2, "t": 0.1, "err_sup": 0.3, "dy_err_sup": 0.5,
                     "wall_layer": 0.5, "nm_proxy": 3.0},
                ]
            )
            store.insert(
                [
                    {"eps": 0.02, "step": 0, "t": 0.0, "err_sup": 0.1, "dy_err_sup": 0.2,
                     "wall_layer": 0.7, "nm_proxy": 1.0},
                ]
            )
            peaks = store.peaks()
            assert peaks["eps"].to_list() == [0.02, 0.01]
            assert peaks["err_sup"].to_list() == [0.1, 0.3]
            assert peaks["wall_layer_peak"].to_list() == [0.7, 1.0]
            assert peaks["samples"].to_list() == [1, 2]
            assert store.all_rows().height == 3
        finally:
            store.close()

    def test_empty_insert(self):
        """Test that an empty member contributes no rows."""
        store = SampleStore()
        try:
            store.insert([])
            assert store.peaks().height == 0
        finally:
            store.close()


class TestRunInviscidLimitSweep:
    """Tests for run_inviscid_limit_sweep."""

    def test_equilibrium(self, rest_plan):
        """Test that a sweep from rest reports zero differences and no exponents."""
        report = run_inviscid_limit_sweep(rest_plan)
        assert report.complete
        assert report.err_sup == [0.0, 0.0]
        assert report.dy_err_sup == [0.0, 0.0]
        assert report.wall_layer_peak == [0.0, 0.0]
        assert report.exponents["err_sup"] is None
        assert report.samples.height == 4
        assert report.table().columns == [
            "eps", "err_sup", "dy_err_sup", "wall_layer_peak", "nm_peak",
        ]
        assert report.metadata["nx"] == 8

    def test_reference_failure_gives_partial_report(self, rest_plan, monkeypatch):
        """Test that a failing eps = 0 run is recorded and the members are skipped."""
        calls = []

        def failing_run(initial, grid, params, mode, *args, **kwargs):
            calls.append(BcMode(mode))
            if mode is BcMode.IDEAL:
                raise StabilityError("reference blew up", t=0.01)
            return run_simulation(initial, grid, params, mode, *args, **kwargs)

        monkeypatch.setattr(sweep, "run_simulation", failing_run)
        report = run_inviscid_limit_sweep(rest_plan)
        assert calls == [BcMode.IDEAL]
        assert not report.complete
        assert [(f.eps, f.error, f.t) for f in report.failures] == [(0.0, "StabilityError", 0.01)]
        assert all(math.isnan(value) for value in report.err_sup)
        assert report.exponents["err_sup"] is None
        assert report.to_dict()["failures"][0]["message"] == "reference blew up"

    def test_member_failure_keeps_other_members(self, rest_plan, monkeypatch):
        """Test that one failing member leaves the others in the report."""

        def flaky_run(initial, grid, params, mode, *args, **kwargs):
            if params.eps == 0.025:
                raise StabilityError("member blew up", t=0.02)
            return run_simulation(initial, grid, params, mode, *args, **kwargs)

        monkeypatch.setattr(sweep, "run_simulation", flaky_run)
        report = run_inviscid_limit_sweep(rest_plan)
        assert [f.eps for f in report.failures] == [0.025]
        assert report.err_sup[0] == 0.0
        assert math.isnan(report.err_sup[1])

    def test_identical_runs_compare_to_zero(self, random_state, small_grid):
        """Test that differences are symmetric and vanish between identical states."""
        other = random_state.replace(u=random_state.u + 0.1)
        assert sweep._sup_difference(random_state, random_state, small_grid) == (0.0, 0.0)
        forward = sweep._sup_difference(random_state, other, small_grid)
        assert forward == sweep._sup_difference(other, random_state, small_grid)
        assert forward[0] == pytest.approx(0.1)

    def test_navier_stokes_difference_ignores_deformation(self, random_state, small_grid):
        """Test that the flow-only comparison skips f1..f4."""
        other = random_state.replace(f2=random_state.f2 + 1.0)
        err, dy_err = sweep._sup_difference(random_state, other, small_grid, ("rho", "u", "v"))
        assert (err, dy_err) == (0.0, 0.0)


class TestFrozenDeformation:
    """Tests for the Navier-Stokes branch right-hand side."""

    def test_zero_deformation_tendency(self, random_state, small_grid):
        """Test that F tendencies vanish and the flow tendencies are untouched."""
        params = PhysParams(eps=0.05, elastic_coupling=False)
        frozen = frozen_deformation(rhs_viscous)(random_state, small_grid, params)
        full = rhs_viscous(random_state, small_grid, params)
        for name in ("d_f1", "d_f2", "d_f3", "d_f4"):
            assert np.all(getattr(frozen, name) == 0.0)
        for name in ("d_rho", "d_u", "d_v"):
            np.testing.assert_array_equal(getattr(frozen, name), getattr(full, name))

    def test_identity_held_during_run(self, tiny_grid):
        """Test that F stays exactly I along a sheared Navier-Stokes run."""
        _, Y = tiny_grid.mesh()
        zeros = tiny_grid.zeros
        initial = StateSnapshot(
            rho=np.ones(tiny_grid.shape), u=0.05 * np.sin(Y), v=zeros(),
            f1=zeros(), f2=zeros(), f3=zeros(), f4=zeros(),
        )
        result = run_simulation(
            initial, tiny_grid, PhysParams(eps=0.05, elastic_coupling=False),
            BcMode.NS_COMPARE, 0.05, OutputPolicy(sample_interval=0),
            rhs=frozen_deformation(rhs_viscous),
        )
        for name in ("f1", "f2", "f3", "f4"):
            assert np.all(getattr(result.final, name) == 0.0)
        assert np.max(np.abs(result.final.u)) > 0.0


class TestComparisonReport:
    """Tests for ComparisonReport."""

    def test_exponent_gap(self, rest_plan):
        """Test the gap between the layer exponents."""
        report = run_inviscid_limit_sweep(rest_plan)
        comparison = ComparisonReport(report, report, 0.1, 0.5, 0.0)
        assert comparison.exponent_gap == pytest.approx(0.4)
        assert ComparisonReport(report, report, None, 0.5, 0.0).exponent_gap is None
        assert comparison.to_dict()["exponent_gap"] == pytest.approx(0.4)
