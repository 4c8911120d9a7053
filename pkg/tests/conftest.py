"""
Common test fixtures for viscoelastic-lab tests.
"""

import math

import numpy as np
import pytest

from viscoelastic_lab.grid_ops import build_grid
from viscoelastic_lab.initdata import DisplacementSpec, piola_initial_data
from viscoelastic_lab.state_model import PhysParams, StateSnapshot, uniform_state


@pytest.fixture
def small_grid():
    """A 16 x 17 grid on [0, 2 pi) x [0, 2]."""
    return build_grid(16, 17, 2.0 * math.pi, 2.0)


@pytest.fixture
def tiny_grid():
    """The smallest sensible grid, for fast time-stepping tests."""
    return build_grid(8, 9, 2.0 * math.pi, 2.0)


@pytest.fixture
def default_params():
    return PhysParams()


@pytest.fixture
def uniform(small_grid):
    """The equilibrium on the small grid."""
    return uniform_state(small_grid)


@pytest.fixture
def piola_state(small_grid):
    """Constraint-satisfying data with a normal displacement component."""
    spec = DisplacementSpec(amplitude=0.05, normal_fraction=0.5)
    return piola_initial_data(small_grid, spec)


@pytest.fixture
def random_state(small_grid):
    """A small random perturbation of the equilibrium."""
    rng = np.random.default_rng(1234)

    def perturb():
        return 0.01 * rng.standard_normal(small_grid.shape)

    return StateSnapshot(
        rho=1.0 + perturb(),
        u=perturb(),
        v=perturb(),
        f1=perturb(),
        f2=perturb(),
        f3=perturb(),
        f4=perturb(),
        t=0.0,
    )


@pytest.fixture
def config_text():
    """A small configuration document for end-to-end tests."""
    return """
[grid]
nx = 8
ny = 9

[physics]
eps = 0.05

[run]
t_end = 0.05
sample_interval = 2

[sweep]
eps_list = [0.05, 0.025]
"""
