"""Matrix-free symmetric solves for the implicit diffusion steps.

Each implicit update solves ``(a*I - d*L) x = b`` where ``L`` is the discrete
Laplacian of :mod:`fluxks.grid`, ``a >= 1`` and ``d > 0``.  The operator is
symmetric positive definite in the cell-weighted inner product, so the solve
is preconditioned conjugate gradients with the residual verified against a
relative tolerance.  The preconditioner is the exact inverse for each grid
mode -- a DCT-II spectral solve on uniform cartesian grids (the cell-centered
no-flux Laplacian diagonalizes in that basis) and a tridiagonal solve on
radial grids -- so the iteration typically converges in one step while the CG
wrapper still certifies the residual.

The constant mode has operator eigenvalue exactly ``a``: with ``a = 1`` the
solve preserves cell-weighted means to roundoff, which is what makes the mass
budget of long runs exact rather than solver-tolerance limited.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
import scipy.fft
from numpy.typing import NDArray
from scipy.linalg import solve_banded

from .errors import SolverError
from .grid import Grid, laplacian_values

SOLVER_RTOL = 1e-10
MAX_ITER = 400


def pcg(
    apply_op: Callable[[NDArray], NDArray],
    b: NDArray,
    x0: NDArray,
    dot: Callable[[NDArray, NDArray], float],
    precond: Callable[[NDArray], NDArray] | None = None,
    rtol: float = SOLVER_RTOL,
    max_iter: int = MAX_ITER,
) -> tuple[NDArray, int, float]:
    """Preconditioned conjugate gradients; returns ``(x, iterations, relres)``.

    Raises:
        SolverError: residual target not reached within ``max_iter`` or the
            operator stopped being positive definite on a search direction.
    """
    norm_b = math.sqrt(dot(b, b))
    if norm_b == 0.0:
        return np.zeros_like(b), 0, 0.0
    apply_m = precond if precond is not None else (lambda r: r)
    x = x0.copy()
    r = b - apply_op(x)
    relres = math.sqrt(dot(r, r)) / norm_b
    if relres <= rtol:
        return x, 0, relres
    z = apply_m(r)
    p = z.copy()
    rz = dot(r, z)
    for k in range(1, max_iter + 1):
        ap = apply_op(p)
        pap = dot(p, ap)
        if not (pap > 0.0 and math.isfinite(pap)):
            raise SolverError(f"operator lost positive definiteness (p'Ap = {pap})")
        alpha = rz / pap
        x = x + alpha * p
        r = r - alpha * ap
        if k % 50 == 0:
            r = b - apply_op(x)  # periodic true-residual refresh
        relres = math.sqrt(dot(r, r)) / norm_b
        if relres <= rtol:
            return x, k, relres
        z = apply_m(r)
        rz_new = dot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(f"no convergence in {max_iter} iterations (relres = {relres:.3e})")


class HelmholtzSolver:
    """Solves ``(a*I - d*L) x = b`` on one grid, reusing precomputed spectra."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self._weights = grid.cell_weights
        if grid.mode in ("cartesian-1d", "cartesian-2d"):
            self._symbol = self._cartesian_symbol(grid)
            self._bands = None
        else:
            self._symbol = None
            self._bands = self._radial_band_parts(grid)

    @staticmethod
    def _cartesian_symbol(grid: Grid) -> NDArray[np.float64]:
        # -L eigenvalues on the DCT-II basis, summed over axes
        parts = []
        for a in range(grid.n_axes):
            n_cells = grid.shape[a]
            h = grid.spacing[a]
            k = np.arange(n_cells)
            parts.append(4.0 * np.sin(0.5 * np.pi * k / n_cells) ** 2 / (h * h))
        if grid.n_axes == 1:
            return parts[0]
        return parts[0][:, None] + parts[1][None, :]

    @staticmethod
    def _radial_band_parts(grid: Grid):
        # transfer rates A_face / (W_cell * h) with boundary faces suppressed,
        # exactly mirroring gradient_faces' zero boundary
        n_cells = grid.shape[0]
        h = grid.spacing[0]
        area = grid.face_areas[0].copy()
        area[0] = 0.0
        area[-1] = 0.0
        w = grid.cell_weights
        lo_rate = area[:-1] / (w * h)  # coupling of cell i to cell i-1
        hi_rate = area[1:] / (w * h)  # coupling of cell i to cell i+1
        return lo_rate, hi_rate

    def dot(self, f: NDArray, g: NDArray) -> float:
        return float(np.sum(f * g * self._weights))

    def solve(
        self, a_coef: float, d_coef: float, rhs: NDArray, x0: NDArray
    ) -> tuple[NDArray, int, float]:
        grid = self.grid

        def apply_op(x: NDArray) -> NDArray:
            return a_coef * x - d_coef * laplacian_values(grid, x)

        if self._symbol is not None:
            denom = a_coef + d_coef * self._symbol

            def precond(r: NDArray) -> NDArray:
                rh = scipy.fft.dctn(r, type=2, norm="ortho")
                return scipy.fft.idctn(rh / denom, type=2, norm="ortho")

        else:
            lo_rate, hi_rate = self._bands
            n_cells = rhs.shape[0]
            ab = np.zeros((3, n_cells))
            ab[1, :] = a_coef + d_coef * (lo_rate + hi_rate)
            ab[0, 1:] = -d_coef * hi_rate[:-1]  # row i, column i+1
            ab[2, :-1] = -d_coef * lo_rate[1:]  # row i+1, column i

            def precond(r: NDArray) -> NDArray:
                return solve_banded((1, 1), ab, r)

        return pcg(apply_op, rhs, x0, self.dot, precond)
