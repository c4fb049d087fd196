"""Shared fixtures: the reference 1d run reused across monitor and
acceptance tests, plus small grid helpers."""

import math

import numpy as np
import pytest

from fluxks.grid import GridFunction, build_grid
from fluxks.model import InitialData, ModelParams, build_initial_data
from fluxks.stepper import StepControls, simulate


def reference_setup():
    """The canonical 1d run: 256 cells on [0,1], chi=1, theta=2, p=1.5,
    eps=1e-3, u0 = 1 + 0.5 cos(pi x), v0 = u0^2, t_end = 20."""
    grid = build_grid("cartesian-1d", extents=(1.0,), cells=(256,))
    initial = build_initial_data(
        grid, family="cosine", base=1.0, amplitude=0.5,
        v0_kind="u0_squared", theta=2.0,
    )
    params = ModelParams(chi=1.0, p=1.5, theta=2.0, eps=1e-3, n=1)
    controls = StepControls(t_end=20.0)
    return grid, initial, params, controls


@pytest.fixture(scope="session")
def reference_run():
    _, initial, params, controls = reference_setup()
    result = simulate(initial, params, controls)
    assert result.status.value == "Completed", result.message
    return result


@pytest.fixture
def grid1d():
    def make(cells=64, length=1.0):
        return build_grid("cartesian-1d", extents=(length,), cells=(cells,))
    return make


@pytest.fixture
def grid2d():
    def make(cells=16, lx=1.0, ly=1.0):
        return build_grid("cartesian-2d", extents=(lx, ly), cells=(cells, cells))
    return make


def cosine_bump(grid, base=1.0, amplitude=0.5):
    # 1d helper: base + amplitude * cos(pi x) sampled at cell centers
    x = grid.axis_centers(0)
    return GridFunction(grid, base + amplitude * np.cos(math.pi * x))


def constant_pair(grid, u_val, v_val):
    return InitialData(
        u0=GridFunction.constant(grid, u_val),
        v0=GridFunction.constant(grid, v_val),
    )
