"""Semi-implicit time stepping for the flux-limited chemotaxis system.

Each step advances the signal first and the density second:

1. ``((1 + dt)*I - dt*L) v_new = v_old + dt * u_old^theta`` -- implicit
   diffusion and damping, explicit production;
2. ``(I - dt*L) u_new = u_old - dt * div(flux(u_old, grad v_new))`` --
   explicit upwind chemotaxis, implicit diffusion.

Both solves run through :class:`fluxks.linalg.HelmholtzSolver` (conjugate
directions, relative residual 1e-10).  The upwind flux with the positivity
CFL keeps the explicit right-hand side nonnegative, and the implicit operator
inverse is positivity preserving, so negative cells can only appear at solver
roundoff scale; they are clamped to zero with the clamped mass logged, and
anything beyond roundoff is a hard error.  Mass is conserved by construction:
the flux divergence telescopes to zero and the u-solve preserves cell-weighted
means to roundoff.

The time step is the smallest of ``dt_max``, the advective positivity bound
(``cfl_safety`` over the largest per-cell outflow rate of the flux
coefficients), and an explicit-production proxy ``cfl_safety / (theta *
max(u)^(theta-1))``.  Diffusion is implicit and imposes no step bound.  A step
below ``dt_min`` is treated as suspected blow-up, as is ``||u||_inf`` beyond
``blowup_linf_threshold``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import functionals
from .errors import FluxksError, PositivityError, TimeStepCollapse
from .grid import GridFunction, _interior_slice, _slice_axis, gradient, gradient_faces, integrate
from .linalg import HelmholtzSolver
from .model import (
    InitialData,
    ModelParams,
    face_gradient_magnitude_sq,
    mollify_initial_data,
    production,
    regularized_flux,
)
from .regimes import RegimeSpec, audit, s_rule

logger = logging.getLogger(__name__)

# negatives smaller than this are expected solver roundoff and clamped to 0
POSITIVITY_CLAMP_TOL = 1e-13
# negatives beyond this signal CFL misconfiguration and abort the run
POSITIVITY_HARD_TOL = 1e-10
# cumulative clamped mass beyond this fraction of the initial mass fails the
# run: clamping is a roundoff patch, not a scheme feature
CLAMPED_MASS_MAX_FRACTION = 1e-10
_T_END_SLACK = 1e-12


class RunStatus(str, enum.Enum):
    COMPLETED = "Completed"
    BLOWUP_SUSPECTED = "BlowUpSuspected"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass(frozen=True)
class StepControls:
    """Time-stepping controls; ``t_end`` is the only required field."""

    t_end: float
    dt_max: float = 0.1
    dt_min: float = 1e-10
    cfl_safety: float = 0.4
    blowup_linf_threshold: float = 1e6

    def __post_init__(self) -> None:
        if not (self.t_end > 0.0 and math.isfinite(self.t_end)):
            raise ValueError(f"t_end must be positive and finite, got {self.t_end}")
        if not (0.0 < self.dt_min <= self.dt_max):
            raise ValueError(f"need 0 < dt_min <= dt_max, got {self.dt_min}, {self.dt_max}")
        if not (0.0 < self.cfl_safety <= 1.0):
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if not (self.blowup_linf_threshold > 0.0):
            raise ValueError("blowup_linf_threshold must be positive")


@dataclass(frozen=True)
class SimState:
    """One trajectory point; ``clamped_mass`` is the mass added by clamping
    at the step that produced this state."""

    u: GridFunction
    v: GridFunction
    t: float
    step_index: int
    clamped_mass: float = 0.0


@dataclass
class SimResult:
    """Outcome of :func:`simulate`."""

    status: RunStatus
    states: list[SimState]
    records: list["functionals.FunctionalRecord"]
    final_state: SimState
    clamped_mass_cumulative: float
    n_steps: int
    message: str = ""


def _flux_coefficients(grid, u_values, v_values, params: ModelParams):
    # face flux coefficient chi * (|grad v|^2 + eps)^((p-2)/2) * grad_v per axis
    grads = gradient_faces(grid, v_values)
    mags = face_gradient_magnitude_sq(grid, grads)
    expo = 0.5 * (params.p - 2.0)
    coeffs = []
    for a in range(grid.n_axes):
        m = mags[a] + params.eps
        factor = np.zeros_like(m)
        nz = m > 0.0
        factor[nz] = m[nz] ** expo
        coeffs.append(params.chi * factor * grads[a])
    return coeffs


def choose_dt(state: SimState, params: ModelParams, controls: StepControls) -> float:
    """Largest admissible step at this state.

    Raises:
        TimeStepCollapse: the bound fell below ``dt_min``.
    """
    grid = state.u.grid
    coeffs = _flux_coefficients(grid, state.u.values, state.v.values, params)
    outflow = np.zeros(grid.shape)
    nd = grid.n_axes
    for a in range(nd):
        c = coeffs[a][_interior_slice(nd, a)]
        area = grid.face_areas[a][_interior_slice(nd, a)]
        w_left = grid.cell_weights[_slice_axis(nd, a, slice(None, -1))]
        w_right = grid.cell_weights[_slice_axis(nd, a, slice(1, None))]
        rate = c * area
        outflow[_slice_axis(nd, a, slice(None, -1))] += np.maximum(rate, 0.0) / w_left
        outflow[_slice_axis(nd, a, slice(1, None))] += np.maximum(-rate, 0.0) / w_right
    max_rate = float(outflow.max())
    dt_adv = controls.cfl_safety / max_rate if max_rate > 0.0 else math.inf

    u_max = float(state.u.values.max())
    prod_rate = params.theta * u_max ** (params.theta - 1.0) if u_max > 0.0 else 0.0
    dt_prod = controls.cfl_safety / prod_rate if prod_rate > 0.0 else math.inf

    dt = min(controls.dt_max, dt_adv, dt_prod)
    if dt < controls.dt_min:
        raise TimeStepCollapse(
            f"time step {dt:.3e} fell below dt_min {controls.dt_min:.3e} "
            f"(advective {dt_adv:.3e}, production {dt_prod:.3e})"
        )
    return dt


def _clamp_negative(values: np.ndarray, weights: np.ndarray, label: str) -> tuple[np.ndarray, float]:
    vmin = float(values.min())
    if vmin >= 0.0:
        return values, 0.0
    if vmin < -POSITIVITY_HARD_TOL:
        raise PositivityError(
            f"{label} dropped to {vmin:.3e}, beyond roundoff {POSITIVITY_HARD_TOL:.1e}: "
            "CFL misconfiguration suspected"
        )
    neg = values < 0.0
    clamped = -float(np.sum(values[neg] * weights[neg]))
    if vmin < -POSITIVITY_CLAMP_TOL:
        logger.debug("%s clamped beyond expected roundoff: min %.3e", label, vmin)
    out = values.copy()
    out[neg] = 0.0
    return out, clamped


def step(
    state: SimState,
    params: ModelParams,
    controls: StepControls,
    dt: float,
    solver: HelmholtzSolver | None = None,
) -> SimState:
    """Advance one step of size ``dt``; see the module docstring for the scheme.

    Raises:
        PositivityError: negative cells beyond roundoff.
        SolverError: linear solve failure or non-finite values.
    """
    grid = state.u.grid
    if solver is None:
        solver = HelmholtzSolver(grid)
    weights = grid.cell_weights

    rhs_v = state.v.values + dt * production(state.u, params).values
    v_new, _, _ = solver.solve(1.0 + dt, dt, rhs_v, x0=state.v.values)
    v_new, _ = _clamp_negative(v_new, weights, "v")

    grad_v = gradient(GridFunction(grid, v_new))
    flux = regularized_flux(state.u, grad_v, params)
    div_flux = np.zeros(grid.shape)
    for a in range(grid.n_axes):
        div_flux += np.diff(grid.face_areas[a] * flux.faces[a], axis=a)
    rhs_u = state.u.values - dt * (div_flux / weights)
    u_new, _, _ = solver.solve(1.0, dt, rhs_u, x0=state.u.values)
    u_new, clamped = _clamp_negative(u_new, weights, "u")

    return SimState(
        u=GridFunction(grid, u_new),
        v=GridFunction(grid, v_new),
        t=state.t + dt,
        step_index=state.step_index + 1,
        clamped_mass=clamped,
    )


def simulate(
    initial: InitialData,
    params: ModelParams,
    controls: StepControls,
    record_every: int = 50,
    q_set: tuple[float, ...] | None = None,
    s: float | None = None,
    q_f1: float | None = None,
    q_f2: float | None = None,
    c_f1: float = 1.0,
    mollify: bool = True,
    keep_states: str = "sampled",
) -> SimResult:
    """Run to ``t_end`` or a terminal condition.

    Functional exponents default to the regime-audit witnesses; ``s`` defaults
    to the s-rule value (the max-norm proxy when infinite).  ``mollify``
    applies the eps-scaled initial smoothing (the signal is left raw on the
    max-norm branch).  ``keep_states`` is ``"sampled"`` (states at the record
    cadence), ``"ends"`` (initial and final only), or ``"all"``.

    Raises:
        ValueError: grid/params dimension mismatch or bad arguments.
    """
    grid = initial.u0.grid
    if params.n != grid.n:
        raise ValueError(f"params.n = {params.n} does not match grid dimension {grid.n}")
    if record_every < 1:
        raise ValueError(f"record_every must be >= 1, got {record_every}")
    if keep_states not in ("sampled", "ends", "all"):
        raise ValueError(f"unknown keep_states {keep_states!r}")

    rule = s_rule(params.n, params.p, params.theta)
    if s is None:
        s = rule.value
    if q_f2 is None or q_f1 is None or q_set is None:
        aud = audit(RegimeSpec(n=params.n, theta=params.theta, p=params.p))
        if q_f2 is None:
            q_f2 = (
                aud.chosen_q
                if aud.route == "entropy" and aud.chosen_q is not None and aud.chosen_q > 1.0
                else 2.0
            )
        if q_f1 is None:
            q_f1 = aud.chosen_q_f1 if aud.chosen_q_f1 is not None else q_f2
        if q_set is None:
            q_set = tuple(sorted({q for q in (q_f1, q_f2, 2.0) if q != 1.0}))

    if mollify and params.eps > 0.0:
        data = mollify_initial_data(initial, params.eps, include_v=not rule.infinite)
    else:
        data = initial

    state = SimState(u=data.u0, v=data.v0, t=0.0, step_index=0)
    solver = HelmholtzSolver(grid)
    initial_mass = integrate(data.u0)
    clamped_cum = 0.0
    records = [
        functionals.record(
            state, params, q_set, s, q_f1=q_f1, q_f2=q_f2, c_f1=c_f1, clamped_mass_cumulative=0.0
        )
    ]
    states = [state]
    status = RunStatus.COMPLETED
    message = ""

    def keep(st: SimState) -> None:
        if keep_states == "all":
            states.append(st)
        elif keep_states == "sampled" and st.step_index % record_every == 0:
            states.append(st)

    while controls.t_end - state.t > _T_END_SLACK * max(1.0, controls.t_end):
        try:
            dt = choose_dt(state, params, controls)
        except TimeStepCollapse as exc:
            status = RunStatus.BLOWUP_SUSPECTED
            message = str(exc)
            break
        dt = min(dt, controls.t_end - state.t)
        try:
            # ValueError covers non-finite values rejected by GridFunction
            state = step(state, params, controls, dt, solver=solver)
        except (FluxksError, ValueError) as exc:
            status = RunStatus.NUMERICAL_FAILURE
            message = str(exc)
            break
        clamped_cum += state.clamped_mass
        if clamped_cum > CLAMPED_MASS_MAX_FRACTION * initial_mass:
            status = RunStatus.NUMERICAL_FAILURE
            message = (
                f"cumulative clamped mass {clamped_cum:.3e} exceeded "
                f"{CLAMPED_MASS_MAX_FRACTION:.0e} of the initial mass {initial_mass:.3e}"
            )
            break
        keep(state)
        if state.step_index % record_every == 0:
            records.append(
                functionals.record(
                    state,
                    params,
                    q_set,
                    s,
                    q_f1=q_f1,
                    q_f2=q_f2,
                    c_f1=c_f1,
                    clamped_mass_cumulative=clamped_cum,
                )
            )
        linf = float(np.max(np.abs(state.u.values)))
        if linf > controls.blowup_linf_threshold:
            status = RunStatus.BLOWUP_SUSPECTED
            message = f"||u||_inf = {linf:.3e} exceeded threshold"
            break

    if records[-1].t != state.t:
        records.append(
            functionals.record(
                state,
                params,
                q_set,
                s,
                q_f1=q_f1,
                q_f2=q_f2,
                c_f1=c_f1,
                clamped_mass_cumulative=clamped_cum,
            )
        )
    if states[-1] is not state:
        states.append(state)

    return SimResult(
        status=status,
        states=states,
        records=records,
        final_state=state,
        clamped_mass_cumulative=clamped_cum,
        n_steps=state.step_index,
        message=message,
    )
