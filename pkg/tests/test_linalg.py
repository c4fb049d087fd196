"""Helmholtz solves checked against dense linear algebra.

The operator (a*I - d*L) is assembled column by column through the public
laplacian and solved with numpy; the matrix-free solver must agree to the
residual tolerance it certifies.
"""

import math

import numpy as np
import pytest

from fluxks.errors import SolverError
from fluxks.grid import GridFunction, build_grid, integrate, laplacian_values
from fluxks.linalg import MAX_ITER, SOLVER_RTOL, HelmholtzSolver, pcg

ALL_GRIDS = [
    ("cartesian-1d", dict(extents=(1.0,), cells=(24,))),
    ("cartesian-2d", dict(extents=(1.0, 1.0), cells=(8, 8))),
    ("radial-n", dict(extents=(1.0,), cells=(24,), n=3)),
]


def dense_operator(grid, a_coef, d_coef):
    size = int(np.prod(grid.shape))
    mat = np.zeros((size, size))
    for j in range(size):
        e = np.zeros(size)
        e[j] = 1.0
        col = a_coef * e.reshape(grid.shape) - d_coef * laplacian_values(
            grid, e.reshape(grid.shape)
        )
        mat[:, j] = col.ravel()
    return mat


@pytest.mark.parametrize("mode,kwargs", ALL_GRIDS)
@pytest.mark.parametrize("a_coef,d_coef", [(1.0, 0.05), (1.1, 0.003)])
def test_solve_matches_dense(mode, kwargs, a_coef, d_coef):
    grid = build_grid(mode, **kwargs)
    rng = np.random.default_rng(42)
    rhs = rng.standard_normal(grid.shape)
    solver = HelmholtzSolver(grid)
    x, iters, relres = solver.solve(a_coef, d_coef, rhs, np.zeros(grid.shape))
    mat = dense_operator(grid, a_coef, d_coef)
    x_dense = np.linalg.solve(mat, rhs.ravel()).reshape(grid.shape)
    assert relres <= SOLVER_RTOL
    np.testing.assert_allclose(x, x_dense, rtol=1e-8, atol=1e-10)


@pytest.mark.parametrize("mode,kwargs", ALL_GRIDS)
def test_operator_spd_in_weighted_inner_product(mode, kwargs):
    grid = build_grid(mode, **kwargs)
    w = grid.cell_weights.ravel()
    mat = dense_operator(grid, 1.0, 0.02)
    weighted = np.diag(w) @ mat
    asym = np.abs(weighted - weighted.T).max() / np.abs(weighted).max()
    assert asym < 1e-12
    eigs = np.linalg.eigvalsh(0.5 * (weighted + weighted.T))
    assert eigs.min() > 0.0


@pytest.mark.parametrize("mode,kwargs", ALL_GRIDS)
def test_solve_preserves_weighted_mean(mode, kwargs):
    # with a = 1 the constant mode passes through: int x = int rhs exactly
    grid = build_grid(mode, **kwargs)
    rng = np.random.default_rng(1)
    rhs = rng.uniform(0.5, 1.5, size=grid.shape)
    solver = HelmholtzSolver(grid)
    x, _, _ = solver.solve(1.0, 0.07, rhs, rhs)
    lhs = integrate(GridFunction(grid, x))
    ref = integrate(GridFunction(grid, rhs))
    assert abs(lhs - ref) / ref < 1e-12


def test_constant_rhs_exact_solution():
    # (a - 0*L) on constants: x = b / a
    grid = build_grid("cartesian-1d", extents=(1.0,), cells=(32,))
    solver = HelmholtzSolver(grid)
    rhs = np.full(grid.shape, 3.0)
    x, iters, _ = solver.solve(1.5, 0.2, rhs, np.zeros(grid.shape))
    np.testing.assert_allclose(x, 2.0, rtol=1e-12)


@pytest.mark.parametrize("mode,kwargs", ALL_GRIDS)
def test_preconditioner_keeps_iterations_small(mode, kwargs):
    # exact spectral/tridiagonal preconditioning: a handful of iterations
    grid = build_grid(mode, **kwargs)
    rng = np.random.default_rng(2)
    rhs = rng.standard_normal(grid.shape)
    solver = HelmholtzSolver(grid)
    _, iters, _ = solver.solve(1.0, 0.5, rhs, np.zeros(grid.shape))
    assert iters <= 5


def test_pcg_plain_matches_numpy():
    # no preconditioner, plain dot: generic SPD system
    rng = np.random.default_rng(3)
    m = rng.standard_normal((30, 30))
    mat = m @ m.T + 30.0 * np.eye(30)
    b = rng.standard_normal(30)
    x, iters, relres = pcg(
        lambda v: mat @ v,
        b,
        np.zeros(30),
        dot=lambda f, g: float(f @ g),
        rtol=1e-12,
    )
    assert relres <= 1e-12
    np.testing.assert_allclose(x, np.linalg.solve(mat, b), rtol=1e-8)
    assert 0 < iters <= MAX_ITER


def test_pcg_zero_rhs_short_circuits():
    x, iters, relres = pcg(
        lambda v: v, np.zeros(5), np.ones(5), dot=lambda f, g: float(f @ g)
    )
    np.testing.assert_allclose(x, 0.0)
    assert iters == 0 and relres == 0.0


def test_pcg_rejects_indefinite_operator():
    mat = np.diag([1.0, -1.0, 2.0])
    b = np.array([1.0, 1.0, 1.0])
    with pytest.raises(SolverError):
        pcg(lambda v: mat @ v, b, np.zeros(3), dot=lambda f, g: float(f @ g))


def test_pcg_reports_nonconvergence():
    # ill-conditioned diagonal, starved iteration budget
    diag = np.logspace(0, 12, 40)
    b = np.ones(40)
    with pytest.raises(SolverError):
        pcg(
            lambda v: diag * v,
            b,
            np.zeros(40),
            dot=lambda f, g: float(f @ g),
            rtol=1e-14,
            max_iter=3,
        )


def test_radial_solver_large_diffusion():
    # stiff d/a ratio still certified to tolerance
    grid = build_grid("radial-n", extents=(1.0,), cells=(128,), n=3)
    solver = HelmholtzSolver(grid)
    rng = np.random.default_rng(8)
    rhs = rng.uniform(0.0, 1.0, size=grid.shape)
    x, _, relres = solver.solve(1.0, 50.0, rhs, np.zeros(grid.shape))
    assert relres <= SOLVER_RTOL
    op = 1.0 * x - 50.0 * laplacian_values(grid, x)
    num = math.sqrt(float(np.sum((op - rhs) ** 2 * grid.cell_weights)))
    den = math.sqrt(float(np.sum(rhs**2 * grid.cell_weights)))
    assert num / den <= 10.0 * SOLVER_RTOL
