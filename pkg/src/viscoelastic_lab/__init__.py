from importlib.metadata import version

__version__ = version("viscoelastic-lab")

from .boundary import BcMode, enforce_boundaries, wall_traces
from .config import Config, parse_config
from .diagnostics import (
    NormReport,
    conormal_norm,
    energy_nm,
    q_norm,
    recovery_residuals,
    wall_layer_indicator,
)
from .dynamics import Tendency, rhs_ideal, rhs_viscous
from .grid_ops import Grid, MultiIndex, apply_conormal_multiindex, build_grid, diff, weight_phi
from .initdata import DisplacementSpec, displacement_map, piola_initial_data
from .manufactured import ManufacturedSolution, run_mms_study
from .reports import emit_reports
from .snapshot_io import load_snapshot, persist_snapshot
from .state_model import (
    PhysParams,
    StateSnapshot,
    constraint_residuals,
    elastic_stress,
    pressure,
    uniform_state,
)
from .sweep import SweepPlan, SweepReport, fit_rate, ns_comparison, run_inviscid_limit_sweep
from .timeint import History, OutputPolicy, cfl_dt, run_simulation, ssprk3_step

__all__ = [
    "BcMode",
    "Config",
    "DisplacementSpec",
    "Grid",
    "History",
    "ManufacturedSolution",
    "MultiIndex",
    "NormReport",
    "OutputPolicy",
    "PhysParams",
    "StateSnapshot",
    "SweepPlan",
    "SweepReport",
    "Tendency",
    "apply_conormal_multiindex",
    "build_grid",
    "cfl_dt",
    "conormal_norm",
    "constraint_residuals",
    "diff",
    "displacement_map",
    "elastic_stress",
    "emit_reports",
    "energy_nm",
    "enforce_boundaries",
    "fit_rate",
    "load_snapshot",
    "ns_comparison",
    "parse_config",
    "persist_snapshot",
    "piola_initial_data",
    "pressure",
    "q_norm",
    "recovery_residuals",
    "rhs_ideal",
    "rhs_viscous",
    "run_inviscid_limit_sweep",
    "run_mms_study",
    "run_simulation",
    "ssprk3_step",
    "uniform_state",
    "wall_layer_indicator",
    "wall_traces",
    "weight_phi",
]
