"""One-sided numerical verification of the interpolation inequalities.

Two inequality families back the a priori estimates:

* first form: ``||f||_{p} <= C ||grad f||_{r}^a ||f||_{q}^{1-a} + C ||f||_{s}``
  with ``a = (1/q - 1/p) / (1/q + 1/n - 1/r)``;
* second form (no-flux version): ``||grad f||_{p} <= C (||lap f||_2^b +
  ||f||_{r}^b) ||f||_{q}^{1-b} + C ||f||_{s}`` with
  ``b = (1/q + 1/n - 1/p) / (1/q + 2/n - 1/2)``.

Verification is one-sided by design: a finite, refinement-stable supremum of
the left/right ratio over a seeded adversarial ensemble certifies a usable
constant; it cannot prove the inequality false.  Ensemble members are analytic
recipes drawn independently of the grid, so re-running with the same seed on a
finer grid evaluates the *same* functions: the constant estimate is
grid-convergent, not resolution-chasing.  Indices below 1 appear legitimately
(the density functionals use ``L^{2/q}`` with ``q > 2``), so norm evaluation
here extends to quasi-norm indices in ``(0, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Grid, GridFunction, gradient_lp_norm, laplacian_values, lp_norm

ENSEMBLE_VERSION = 1
EXPONENT_TOL = 1e-12


def _inv(x: float) -> float:
    if x == math.inf:
        return 0.0
    if x <= 0.0:
        raise ValueError(f"Lebesgue index must be positive or inf, got {x}")
    return 1.0 / x


def gn_exponent(p_hat: float, q_hat: float, r_hat: float, n: int) -> float:
    """Interpolation power ``a`` of the first inequality form.

    Raises:
        ValueError: zero denominator or ``a`` outside ``[0, 1]`` (beyond a
            1e-12 rounding margin, which is clamped).
    """
    num = _inv(q_hat) - _inv(p_hat)
    den = _inv(q_hat) + 1.0 / n - _inv(r_hat)
    if den == 0.0:
        raise ValueError("gn_exponent: degenerate denominator 1/q + 1/n - 1/r = 0")
    a = num / den
    if a < -EXPONENT_TOL or a > 1.0 + EXPONENT_TOL:
        raise ValueError(f"gn_exponent: a = {a} outside [0, 1]")
    return min(max(a, 0.0), 1.0)


def gn2_exponent(p_hat: float, q_hat: float, n: int) -> float:
    """Interpolation power ``b`` of the second (no-flux) inequality form.

    Raises:
        ValueError: ``b`` outside ``[1/2, 1]`` beyond rounding.
    """
    num = _inv(q_hat) + 1.0 / n - _inv(p_hat)
    den = _inv(q_hat) + 2.0 / n - 0.5
    if den == 0.0:
        raise ValueError("gn2_exponent: degenerate denominator")
    b = num / den
    if b < 0.5 - EXPONENT_TOL or b > 1.0 + EXPONENT_TOL:
        raise ValueError(f"gn2_exponent: b = {b} outside [1/2, 1]")
    return min(max(b, 0.5), 1.0)


@dataclass(frozen=True)
class GNExponents:
    """Index tuple for the first form; ``a`` is derived on construction."""

    p_hat: float
    q_hat: float
    r_hat: float
    s_hat: float
    n: int

    def __post_init__(self) -> None:
        if self.r_hat != math.inf and self.r_hat < 1.0:
            raise ValueError(f"gradient index r must be >= 1, got {self.r_hat}")
        for name in ("p_hat", "q_hat", "s_hat"):
            val = getattr(self, name)
            if val != math.inf and val <= 0.0:
                raise ValueError(f"{name} must be positive, got {val}")
        gn_exponent(self.p_hat, self.q_hat, self.r_hat, self.n)  # validates

    @property
    def a(self) -> float:
        return gn_exponent(self.p_hat, self.q_hat, self.r_hat, self.n)

    def to_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "q_hat": self.q_hat,
            "r_hat": self.r_hat,
            "s_hat": self.s_hat,
            "n": self.n,
            "a": self.a,
        }


@dataclass(frozen=True)
class GN2Exponents:
    """Index tuple for the second form; ``b`` is derived on construction."""

    p_hat: float
    q_hat: float
    r_hat: float
    s_hat: float
    n: int

    def __post_init__(self) -> None:
        if not (2.0 <= self.r_hat <= self.q_hat):
            raise ValueError(
                f"second-form indices need 2 <= r <= q, got r={self.r_hat}, q={self.q_hat}"
            )
        gn2_exponent(self.p_hat, self.q_hat, self.n)  # validates

    @property
    def b(self) -> float:
        return gn2_exponent(self.p_hat, self.q_hat, self.n)

    def to_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "q_hat": self.q_hat,
            "r_hat": self.r_hat,
            "s_hat": self.s_hat,
            "n": self.n,
            "b": self.b,
        }


def quasi_lp(f: GridFunction, p: float) -> float:
    """Lebesgue functional extended to quasi-norm indices ``p in (0, 1)``."""
    if p == math.inf:
        return lp_norm(f, math.inf)
    if p <= 0.0:
        raise ValueError(f"index must be positive, got {p}")
    if p >= 1.0:
        return lp_norm(f, p)
    return float(np.sum(np.abs(f.values) ** p * f.grid.cell_weights) ** (1.0 / p))


def gn_ratio(f: GridFunction, exps: GNExponents) -> float:
    """Left/right ratio of the first form with ``C = 1``.

    Raises:
        ValueError: identically zero ``f`` (zero right-hand side).
    """
    lhs = quasi_lp(f, exps.p_hat)
    a = exps.a
    grad = gradient_lp_norm(f, exps.r_hat)
    rhs = grad**a * quasi_lp(f, exps.q_hat) ** (1.0 - a) + quasi_lp(f, exps.s_hat)
    if rhs == 0.0:
        raise ValueError("gn_ratio: zero right-hand side (f vanishes identically)")
    return lhs / rhs


def gn2_ratio(f: GridFunction, exps: GN2Exponents) -> float:
    """Left/right ratio of the second form with ``C = 1``."""
    grid = f.grid
    lhs = gradient_lp_norm(f, exps.p_hat)
    b = exps.b
    lap_l2 = float(np.sqrt(np.sum(laplacian_values(grid, f.values) ** 2 * grid.cell_weights)))
    rhs = (lap_l2**b + quasi_lp(f, exps.r_hat) ** b) * quasi_lp(f, exps.q_hat) ** (1.0 - b)
    rhs += quasi_lp(f, exps.s_hat)
    if rhs == 0.0:
        raise ValueError("gn2_ratio: zero right-hand side (f vanishes identically)")
    return lhs / rhs


# -- seeded adversarial ensemble -------------------------------------------


def _fourier_member(rng: np.random.Generator, n_modes: int = 8):
    terms = int(rng.integers(2, 7))
    ks = [tuple(int(k) for k in rng.integers(0, n_modes + 1, size=2)) for _ in range(terms)]
    coeffs = [float(rng.normal(0.0, 1.0 / (1.0 + kx * kx + ky * ky))) for kx, ky in ks]
    shift = float(rng.normal(0.0, 0.5))

    def fn(*coords):
        total = np.zeros_like(coords[0]) + shift
        for (kx, ky), c in zip(ks, coeffs):
            term = np.cos(kx * np.pi * coords[0])
            if len(coords) > 1:
                term = term * np.cos(ky * np.pi * coords[1])
            total = total + c * term
        return total

    return fn


def _polynomial_member(rng: np.random.Generator):
    deg = int(rng.integers(1, 5))
    coeffs = rng.normal(0.0, 1.0, size=deg + 1)

    def fn(*coords):
        x = coords[0]
        if len(coords) > 1:
            x = 0.5 * (coords[0] + coords[1])
        return sum(float(c) * x**k for k, c in enumerate(coeffs))

    return fn


def _near_constant_member(rng: np.random.Generator):
    base = float(rng.uniform(0.5, 2.0))
    wiggle = 1e-6 * float(rng.uniform(0.5, 2.0))

    def fn(*coords):
        return base + wiggle * np.cos(np.pi * coords[0])

    return fn


def _spike_member(rng: np.random.Generator):
    center = rng.uniform(0.15, 0.85, size=2)
    width = float(rng.uniform(0.02, 0.08))

    def fn(*coords):
        d2 = (coords[0] - center[0]) ** 2
        if len(coords) > 1:
            d2 = d2 + (coords[1] - center[1]) ** 2
        return np.exp(-d2 / (2.0 * width * width))

    return fn


_FAMILIES = (_fourier_member, _polynomial_member, _near_constant_member, _spike_member)


def ensemble(grid: Grid, size: int, seed: int) -> list[GridFunction]:
    """Seeded test functions: analytic recipes sampled on the grid.

    The recipes (versioned by ``ENSEMBLE_VERSION``) are drawn before touching
    the grid, so the same seed on a refined grid yields the same functions.
    Coordinates are rescaled to the unit box for sampling.
    """
    if size < 1:
        raise ValueError(f"ensemble size must be >= 1, got {size}")
    rng = np.random.default_rng(seed)
    members = []
    scale = [e for e in grid.extents]
    mesh = tuple(m / s for m, s in zip(grid.center_mesh(), scale))
    for i in range(size):
        fn = _FAMILIES[i % len(_FAMILIES)](rng)
        values = np.asarray(fn(*mesh), dtype=np.float64) * np.ones(grid.shape)
        if float(np.max(np.abs(values))) == 0.0:
            values = values + 1.0
        members.append(GridFunction(grid, values))
    return members


def gn_constant_estimate(
    grid: Grid, exps: GNExponents, size: int = 200, seed: int = 0
) -> float:
    """Supremum of :func:`gn_ratio` over the seeded ensemble (one-sided C)."""
    return max(gn_ratio(f, exps) for f in ensemble(grid, size, seed))


def gn2_constant_estimate(
    grid: Grid, exps: GN2Exponents, size: int = 200, seed: int = 0
) -> float:
    """Supremum of :func:`gn2_ratio` over the seeded ensemble."""
    return max(gn2_ratio(f, exps) for f in ensemble(grid, size, seed))


def poincare_ratio(f: GridFunction) -> float:
    """``||f - mean||_2 / ||grad f||_2`` (mean-zero Poincare quotient)."""
    grid = f.grid
    mean = float(np.sum(f.values * grid.cell_weights)) / grid.measure
    dev = f.values - mean
    num = math.sqrt(float(np.sum(dev**2 * grid.cell_weights)))
    den = gradient_lp_norm(f, 2.0)
    if den == 0.0:
        raise ValueError("poincare_ratio: constant function has zero gradient")
    return num / den


def poincare_constant_estimate(grid: Grid, size: int = 200, seed: int = 0) -> float:
    """Supremum of the Poincare quotient over the non-constant ensemble members."""
    best = 0.0
    for f in ensemble(grid, size, seed):
        if gradient_lp_norm(f, 2.0) == 0.0:
            continue
        best = max(best, poincare_ratio(f))
    return best


# -- exponent sets used by the a priori estimates ---------------------------


def density_step_set(n: int, p: float, q1: float) -> GNExponents:
    """Index tuple of the density-step interpolation (first form)."""
    if not (p < 2.0):
        raise ValueError(f"density step needs p < 2, got {p}")
    return GNExponents(
        p_hat=2.0 / (2.0 - p), q_hat=2.0 / q1, r_hat=2.0, s_hat=2.0 / q1, n=n
    )


def signal_l2_step_set(n: int, theta: float, q1: float) -> GNExponents:
    """Index tuple of the signal-energy production coupling (first form).

    The auxiliary index ``r`` is picked deterministically in its admissible
    window (midpoint, window capped at width 8).
    """
    r_lo = max(1.0, 2.0 * n / (n + 2.0))
    caps = [r_lo + 8.0]
    young_gap = 2.0 * theta + 1.0 - 2.0 / n - q1
    if young_gap > 0.0:
        caps.append(2.0 / young_gap)
    if n >= 3:
        caps.append(q1 / ((1.0 - 2.0 / n) * theta))
    r_hi = min(caps)
    if r_hi <= r_lo:
        raise ValueError(
            f"signal-l2 step has empty r window for n={n}, theta={theta}, q1={q1}"
        )
    r_aux = 0.5 * (r_lo + r_hi)
    return GNExponents(
        p_hat=2.0 * theta * r_aux / q1, q_hat=2.0 / q1, r_hat=2.0, s_hat=2.0 / q1, n=n
    )


def signal_grad_step_set(n: int, theta: float, q2: float) -> GNExponents:
    """Index tuple of the gradient-energy production coupling (first form)."""
    return GNExponents(
        p_hat=4.0 * theta / q2, q_hat=2.0 / q2, r_hat=2.0, s_hat=2.0 / q2, n=n
    )
