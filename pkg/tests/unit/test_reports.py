"""
Unit tests for report files.
"""

import json
import math

import polars as pl
import pytest

from viscoelastic_lab.diagnostics import NormReport, TrajectoryAccumulator, sample_report
from viscoelastic_lab.reports import emit_reports, format_float, norms_frame
from viscoelastic_lab.sweep import ComparisonReport, MemberFailure, SweepReport


def _sweep_report(eps_list=(1e-2, 5e-3, 2.5e-3, 1.25e-3)):
    values = [0.1 * eps**0.5 for eps in eps_list]
    return SweepReport(
        eps_list=tuple(eps_list),
        err_sup=values,
        dy_err_sup=[2.0 * v for v in values],
        wall_layer_peak=[1.0 / v for v in values],
        nm_peak=[1.0] * len(eps_list),
        exponents={"err_sup": 0.5},
        reference_wall_layer=0.0,
        metadata={"nx": 8},
    )


@pytest.fixture
def report(piola_state, small_grid, default_params):
    return sample_report([piola_state], small_grid, default_params, TrajectoryAccumulator())


class TestFormatFloat:
    """Tests for format_float."""

    @pytest.mark.parametrize("value", [0.1, 1.0 / 3.0, math.pi * 1e-17, 2.0**-1074, 1e300])
    def test_round_trip(self, value):
        """Test that 17 significant digits re-parse to the same double."""
        assert float(format_float(value)) == value


class TestEmitReports:
    """Tests for emit_reports."""

    def test_empty_series(self, tmp_path):
        """Test that an empty series writes only the header."""
        emit_reports([], None, tmp_path)
        lines = (tmp_path / "norms.csv").read_text().splitlines()
        assert lines == [",".join(NormReport.columns(2))]
        assert (tmp_path / "plotdata" / "t_vs_wall_layer.dat").read_text() == ""

    def test_single_sample(self, tmp_path, report):
        """Test one header line plus one data line."""
        emit_reports([report], None, tmp_path)
        lines = (tmp_path / "norms.csv").read_text().splitlines()
        assert len(lines) == 2
        frame = pl.read_csv(tmp_path / "norms.csv")
        assert frame["nm_proxy"][0] == report.nm_proxy
        assert frame["det_res"][0] == report.det_res

    def test_column_order_for_lower_order(self, report):
        """Test that the frame follows the header of the requested order."""
        assert norms_frame([], m=0).columns == NormReport.columns(0)
        assert norms_frame([report]).columns == NormReport.columns(2)

    def test_sweep_files(self, tmp_path):
        """Test that a four-member sweep writes four rows everywhere."""
        paths = emit_reports([], _sweep_report(), tmp_path)
        assert tmp_path / "sweep.json" in paths
        assert len((tmp_path / "sweep.csv").read_text().splitlines()) == 5
        plot = tmp_path / "plotdata" / "sweep_eps_vs_err_sup.dat"
        rows = [line.split(" ") for line in plot.read_text().splitlines()]
        assert len(rows) == 4
        assert float(rows[1][0]) == 5e-3
        assert float(rows[1][1]) == 0.1 * 5e-3**0.5
        document = json.loads((tmp_path / "sweep.json").read_text())
        assert document["exponents"]["err_sup"] == 0.5
        assert document["eps_list"] == [1e-2, 5e-3, 2.5e-3, 1.25e-3]

    def test_failed_member_is_null(self, tmp_path):
        """Test that NaN peaks become null in JSON."""
        sweep = _sweep_report((1e-2, 5e-3))
        sweep.err_sup[1] = math.nan
        sweep.failures.append(MemberFailure(eps=5e-3, error="StabilityError", message="boom"))
        emit_reports([], sweep, tmp_path)
        document = json.loads((tmp_path / "sweep.json").read_text())
        assert document["err_sup"][1] is None
        assert document["failures"][0]["error"] == "StabilityError"

    def test_comparison_files(self, tmp_path):
        """Test that both branches and the comparison summary are written."""
        comparison = ComparisonReport(_sweep_report(), _sweep_report(), 0.0, 0.5, 0.0)
        emit_reports([], None, tmp_path, comparison=comparison)
        for name in ("elastic.json", "navier_stokes.csv", "comparison.json"):
            assert (tmp_path / name).exists()
        document = json.loads((tmp_path / "comparison.json").read_text())
        assert document["exponent_gap"] == 0.5
