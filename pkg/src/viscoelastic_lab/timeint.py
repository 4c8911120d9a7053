"""
Explicit SSP-RK3 time stepping and the snapshot history behind Z0.
"""

import logging
import math
from collections import deque
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .boundary import DEFAULT_SPONGE_RATE, BcMode, enforce_boundaries
from .diagnostics import NormReport, TrajectoryAccumulator, sample_report
from .dynamics import Tendency, rhs_ideal, rhs_viscous
from .errors import StabilityError, ValidationError
from .grid_ops import Grid, check_uniform_spacing
from .logging import logger as default_logger
from .snapshot_io import persist_snapshot
from .state_model import PhysParams, StateSnapshot, sound_speed, spectral_norm_2x2

DEFAULT_Z0_DEPTH = 3
CFL_ABORT_FACTOR = 2.0

RhsEvaluator = Callable[[StateSnapshot, Grid, PhysParams], Tendency]
# (state, sponge_dt) -> state with boundary values imposed
Closure = Callable[[StateSnapshot, float], StateSnapshot]


def _check_finite(state: StateSnapshot, stage: Optional[int] = None) -> None:
    for name, values in state.fields().items():
        if not np.all(np.isfinite(values)):
            where = f" after stage {stage}" if stage is not None else ""
            raise StabilityError(
                f"non-finite values in {name}{where} at t={state.t}",
                t=state.t,
                field=name,
                stage=stage,
            )


def cfl_dt(state: StateSnapshot, grid: Grid, params: PhysParams, cfl: float) -> float:
    """
    Largest stable step times ``cfl``.

    s_max = max(|u| + |v| + sqrt(gamma rho^(gamma-1)) + ||F||_2) with ||F||_2
    the spectral norm, so the uniform state has s_max = sqrt(gamma) + 1. The
    viscous bound h^2 / (4 eps (2 mu + lambda)) is dropped when eps = 0.

    Raises:
        ValidationError: If cfl is not positive.
        StabilityError: If the state holds non-finite values.
    """
    if not cfl > 0:
        raise ValidationError("cfl must be > 0")
    _check_finite(state)
    speed = (
        np.abs(state.u)
        + np.abs(state.v)
        + sound_speed(state.rho, params.gamma)
        + spectral_norm_2x2(state)
    )
    h = grid.h
    bound = h / float(np.max(speed))
    if params.eps > 0:
        bound = min(bound, h * h / (4.0 * params.eps * (2.0 * params.mu + params.lam)))
    return cfl * bound


class History(Sequence):
    """
    Bounded ring of snapshots, newest last.

    Appending checks that times increase strictly and stay uniformly spaced;
    the oldest snapshot drops out once ``capacity`` is reached.
    """

    def __init__(self, capacity: int = DEFAULT_Z0_DEPTH + 1):
        if capacity < 1:
            raise ValidationError("history capacity must be ≥ 1")
        self._snapshots: deque[StateSnapshot] = deque(maxlen=capacity)

    @property
    def capacity(self) -> int:
        return self._snapshots.maxlen

    @property
    def times(self) -> list[float]:
        return [snapshot.t for snapshot in self._snapshots]

    def append(self, snapshot: StateSnapshot) -> None:
        check_uniform_spacing(self.times + [snapshot.t])
        self._snapshots.append(snapshot)

    def __getitem__(self, index):
        return self._snapshots[index]

    def __len__(self) -> int:
        return len(self._snapshots)


def boundary_closure(
    grid: Grid,
    mode: BcMode,
    sponge_rate: float = DEFAULT_SPONGE_RATE,
    constrained: Optional[bool] = None,
) -> Closure:
    """The wall/far-field closure of ``enforce_boundaries`` as a stage hook."""

    def close(state: StateSnapshot, sponge_dt: float) -> StateSnapshot:
        return enforce_boundaries(
            state, grid, mode, dt=sponge_dt, sponge_rate=sponge_rate, constrained=constrained
        )

    return close


def _euler(state: StateSnapshot, dt: float, tendency: Tendency, t: float) -> StateSnapshot:
    rates = tendency.fields()
    return StateSnapshot.from_fields(
        {name: values + dt * rates[name] for name, values in state.fields().items()}, t=t
    )


def _blend(a: float, first: StateSnapshot, b: float, second: StateSnapshot, t: float):
    other = second.fields()
    return StateSnapshot.from_fields(
        {name: a * values + b * other[name] for name, values in first.fields().items()}, t=t
    )


def ssprk3_step(
    state: StateSnapshot,
    dt: float,
    rhs_evaluator: RhsEvaluator,
    grid: Grid,
    params: PhysParams,
    mode: BcMode,
    *,
    closure: Optional[Closure] = None,
    sponge_rate: float = DEFAULT_SPONGE_RATE,
) -> StateSnapshot:
    """
    Advance one step with the three-stage strong-stability-preserving scheme.

        u1 = u0 + dt R(u0)
        u2 = 3/4 u0 + 1/4 (u1 + dt R(u1))
        u3 = 1/3 u0 + 2/3 (u2 + dt R(u2))

    The closure runs after every stage; the sponge relaxation acts only once,
    after the last stage, over the full step.

    Raises:
        ValidationError: If dt is not positive.
        StabilityError: If a stage produces non-finite values.
    """
    if not dt > 0:
        raise ValidationError("dt must be > 0")
    close = closure or boundary_closure(grid, mode, sponge_rate)
    t0 = state.t

    stage1 = close(_euler(state, dt, rhs_evaluator(state, grid, params), t0 + dt), 0.0)
    _check_finite(stage1, stage=1)

    stage2 = _euler(stage1, dt, rhs_evaluator(stage1, grid, params), t0 + dt)
    stage2 = close(_blend(0.75, state, 0.25, stage2, t0 + 0.5 * dt), 0.0)
    _check_finite(stage2, stage=2)

    stage3 = _euler(stage2, dt, rhs_evaluator(stage2, grid, params), t0 + dt)
    stage3 = close(_blend(1.0 / 3.0, state, 2.0 / 3.0, stage3, t0 + dt), dt)
    _check_finite(stage3, stage=3)
    return stage3


@dataclass(frozen=True)
class OutputPolicy:
    """
    What a run records along the way.

    Attributes:
        sample_interval: Steps between diagnostic samples; 0 disables them.
        snapshot_interval: Steps between snapshot dumps; 0 disables them.
        snapshot_dir: Directory receiving ``snap_<step>.vels`` dumps.
        m: Conormal order of the sampled norms.
        z0_depth: Highest Z0 order the history supports.
        include_time: Whether sampled norms use Z0 once the history allows.
    """

    sample_interval: int = 10
    snapshot_interval: int = 0
    snapshot_dir: Optional[Path] = None
    m: int = 2
    z0_depth: int = DEFAULT_Z0_DEPTH
    include_time: bool = True

    def __post_init__(self):
        for name in ("sample_interval", "snapshot_interval", "m", "z0_depth"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ValidationError(f"{name} must be a nonnegative integer")
        if self.snapshot_interval > 0 and self.snapshot_dir is None:
            raise ValidationError("snapshot_interval needs a snapshot_dir")


@dataclass
class SimulationResult:
    final: StateSnapshot
    history: History
    series: list[NormReport] = field(default_factory=list)
    dt: float = 0.0
    steps: int = 0


def default_rhs(mode: BcMode) -> RhsEvaluator:
    return rhs_ideal if BcMode(mode) is BcMode.IDEAL else rhs_viscous


def run_simulation(
    initial: StateSnapshot,
    grid: Grid,
    params: PhysParams,
    mode: BcMode,
    t_end: float,
    output_policy: Optional[OutputPolicy] = None,
    *,
    cfl: float = 0.4,
    dt: Optional[float] = None,
    rhs: Optional[RhsEvaluator] = None,
    closure: Optional[Closure] = None,
    sponge_rate: float = DEFAULT_SPONGE_RATE,
    on_sample: Optional[Callable[[int, StateSnapshot, NormReport], None]] = None,
    logger: Optional[logging.Logger] = None,
) -> SimulationResult:
    """
    Integrate from ``initial.t`` to ``initial.t + t_end`` with a fixed step.

    The step comes from ``cfl_dt`` on the initial state unless ``dt`` is
    given, and is shortened so that a whole number of steps lands on t_end.
    Each step re-checks the CFL bound and aborts once the step exceeds it by
    more than a factor of two. Sample times are t0 + n dt, so the history
    spacing stays uniform.

    Raises:
        ValidationError: If t_end is negative.
        StabilityError: On non-finite values or a violated CFL bound.
        RegimeError: If the state leaves the regime guard.
    """
    log = logger or default_logger
    policy = output_policy or OutputPolicy()
    if not t_end >= 0:
        raise ValidationError("t_end must be ≥ 0")
    history = History(policy.z0_depth + 1)
    if t_end == 0:
        return SimulationResult(final=initial, history=history)

    mode = BcMode(mode)
    rhs = rhs or default_rhs(mode)
    close = closure or boundary_closure(grid, mode, sponge_rate)
    state = close(initial, 0.0)

    step_dt = dt if dt is not None else cfl_dt(state, grid, params, cfl)
    if not step_dt > 0:
        raise ValidationError("dt must be > 0")
    steps = max(1, math.ceil(t_end / step_dt - 1e-12))
    step_dt = t_end / steps
    t0 = state.t
    log.info(
        f"Running {mode} to t={t0 + t_end:g} in {steps} steps of dt={step_dt:.3e} "
        f"(eps={params.eps:g}, grid {grid.nx}x{grid.ny})"
    )

    accumulator = TrajectoryAccumulator()
    series: list[NormReport] = []
    for step in range(steps + 1):
        if policy.sample_interval and step % policy.sample_interval == 0:
            history.append(state)
            report = sample_report(
                history, grid, params, accumulator, policy.m, policy.include_time
            )
            series.append(report)
            log.debug(f"t={state.t:.4f} Nm={report.nm_proxy:.6e} Q={report.q_proxy:.6e}")
            if on_sample is not None:
                on_sample(step, state, report)
        if policy.snapshot_interval and step % policy.snapshot_interval == 0:
            path = Path(policy.snapshot_dir) / f"snap_{step:07d}.vels"
            persist_snapshot(state, grid, params, path)
        if step == steps:
            break

        allowed = cfl_dt(state, grid, params, cfl)
        if step_dt > CFL_ABORT_FACTOR * allowed:
            raise StabilityError(
                f"time step {step_dt:.3e} exceeds the CFL bound {allowed:.3e} "
                f"by more than {CFL_ABORT_FACTOR:g}x at t={state.t}",
                t=state.t,
            )
        state = ssprk3_step(
            state, step_dt, rhs, grid, params, mode, closure=close, sponge_rate=sponge_rate
        )
        state = state.replace(t=t0 + (step + 1) * step_dt)

    log.info(f"Finished at t={state.t:g} with {len(series)} samples")
    return SimulationResult(final=state, history=history, series=series, dt=step_dt, steps=steps)


