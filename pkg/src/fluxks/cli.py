"""Command-line entry point: simulate, sweep, audit, gn-test, report.

Exit codes:

* 0 -- success (run Completed with all monitors passing and not Growing;
  sweep/report with zero flags; audit/gn-test completed with passing checks)
* 1 -- a monitor verdict failed (mass/positivity/dissipation failure, a
  Growing classification, flagged sweep points, unstable gn constants)
* 2 -- the run ended BlowUpSuspected or NumericalFailure
* 3 -- configuration error (bad flags, bad config file, unknown keys)

The only environment variable honored is ``FLUXKS_OUT``: it overrides the
default output directory when ``--out`` is not given.  Every emitted artifact
embeds the effective configuration and the tool version.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import fields as dataclass_fields
from pathlib import Path

from ._version import __version__
from .config import RunConfig, parse_config
from .errors import ConfigError, FluxksError
from .functionals import write_records_csv
from .gn import (
    GN2Exponents,
    ENSEMBLE_VERSION,
    density_step_set,
    gn2_constant_estimate,
    gn_constant_estimate,
    poincare_constant_estimate,
    signal_grad_step_set,
    signal_l2_step_set,
)
from .grid import Grid, build_grid
from .monitors import (
    MIN_DISSIPATION_RECORDS,
    check_dissipation_inequality,
    check_mass,
    check_positivity,
    classify,
)
from .regimes import RegimeSpec, audit, relative_p
from .stepper import RunStatus, SimResult, simulate
from .sweep import (
    SweepSpec,
    canonical_json,
    regime_map_summary,
    run_sweep,
    write_atomic,
)

GN_STABILITY_RTOL = 0.15
DEFAULT_OUT = "fluxks-out"


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; the contract reserves 2 for
    # runtime blow-up, so remap usage errors onto the config-error path
    def error(self, message: str) -> None:  # noqa: D401
        raise ConfigError(message)


def _resolve_out(flag_value: str | None, default: str = DEFAULT_OUT) -> Path:
    if flag_value:
        return Path(flag_value)
    env = os.environ.get("FLUXKS_OUT")
    if env:
        return Path(env)
    return Path(default)


def _tool_stamp() -> dict:
    return {"name": "fluxks", "version": __version__}


def _print_json(obj: dict) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


# -- simulate ----------------------------------------------------------------


def _write_snapshots(out: Path, result: SimResult, cfg: RunConfig, grid: Grid) -> None:
    lines = []
    for state in result.states:
        cells = [repr(float(state.t))]
        cells += [repr(float(x)) for x in state.u.values.ravel(order="C")]
        cells += [repr(float(x)) for x in state.v.values.ravel(order="C")]
        lines.append(" ".join(cells))
    write_atomic(out / "snapshots.txt", "\n".join(lines) + "\n")
    meta = {
        "tool": _tool_stamp(),
        "config": cfg.effective(),
        "format": "per line: t, then u cell values, then v cell values, "
        "whitespace-separated, C order over the cell index grid",
        "grid": grid.describe(),
        "n_snapshots": len(result.states),
    }
    write_atomic(out / "snapshots.meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = parse_config(args.config)
    grid = cfg.build_grid()
    initial = cfg.build_initial(grid)
    out = _resolve_out(args.out)
    out.mkdir(parents=True, exist_ok=True)

    keep = "sampled" if args.snapshots else "ends"
    result = simulate(
        initial, cfg.model, cfg.controls, keep_states=keep, **cfg.simulate_kwargs()
    )

    effective = cfg.effective()
    meta = f"fluxks {__version__}\nconfig {canonical_json(effective)}"
    write_records_csv(result.records, out / "functionals.csv", meta_comment=meta)

    verdicts = {
        "mass-conservation": check_mass(result.records),
        "positivity": check_positivity(result.states),
    }
    skipped = []
    if result.status == RunStatus.COMPLETED and len(result.records) >= MIN_DISSIPATION_RECORDS:
        for name in ("F1", "F2"):
            verdicts[f"dissipation-{name}"] = check_dissipation_inequality(
                result.records, which=name
            )
    else:
        skipped.append("dissipation (run not Completed or too few records)")
    regime = classify(result.records, result.status)

    if result.status != RunStatus.COMPLETED:
        code = 2
    elif any(not v.passed for v in verdicts.values()) or regime.classification == "Growing":
        code = 1
    else:
        code = 0

    report = {
        "tool": _tool_stamp(),
        "config": effective,
        "status": result.status.value,
        "message": result.message,
        "n_steps": result.n_steps,
        "t_final": result.final_state.t,
        "clamped_mass_cumulative": result.clamped_mass_cumulative,
        "verdicts": {k: v.to_dict() for k, v in verdicts.items()},
        "skipped_checks": skipped,
        "classification": regime.to_dict(),
        "exit_code": code,
    }
    write_atomic(out / "run.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    if args.snapshots:
        _write_snapshots(out, result, cfg, grid)

    for name, v in verdicts.items():
        print(v.summary())
    print(f"classification: {regime.classification} ({regime.reason})")
    print(f"status: {result.status.value}; artifacts in {out}")
    return code


# -- sweep -------------------------------------------------------------------


def _parse_sweep_config(path: str) -> SweepSpec:
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read sweep config {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"sweep config {p} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("sweep config root must be an object")
    allowed = {f.name for f in dataclass_fields(SweepSpec)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in sweep config; allowed: {sorted(allowed)}")
    for key in ("n_values", "theta_values", "p_values"):
        if key not in data:
            raise ConfigError(f"missing required sweep key {key!r}")
        if not isinstance(data[key], list):
            raise ConfigError(f"sweep {key} must be an array")
        data[key] = tuple(data[key])
    return SweepSpec(**data)


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = _parse_sweep_config(args.config)
    out = _resolve_out(args.out, default="fluxks-sweep")
    result = run_sweep(spec, out, parallelism=args.parallelism, resume=not args.no_resume)
    print(regime_map_summary(result.results), end="")
    print(
        f"ran {result.n_run}, resumed {result.n_skipped}; "
        f"regime map: {result.regime_map_path}"
    )
    return 0 if result.n_mismatch == 0 else 1


# -- audit -------------------------------------------------------------------


def _cmd_audit(args: argparse.Namespace) -> int:
    if (args.p is None) == (args.p_fraction is None):
        raise ConfigError("audit needs exactly one of --p or --p-fraction")
    try:
        p = args.p if args.p is not None else relative_p(args.n, args.theta, args.p_fraction)
        spec = RegimeSpec(n=args.n, theta=args.theta, p=p)
        report = audit(spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    payload = {"tool": _tool_stamp(), **report.to_dict()}
    _print_json(payload)
    return 0


# -- gn-test -----------------------------------------------------------------


def _gn_test_grid(n: int, cells: int) -> Grid:
    if n == 1:
        return build_grid("cartesian-1d", extents=(1.0,), cells=(cells,))
    if n == 2:
        return build_grid("cartesian-2d", extents=(1.0, 1.0), cells=(cells, cells))
    return build_grid("radial-n", extents=(1.0,), cells=(cells,), n=n)


def _refined(grid: Grid) -> Grid:
    cells = tuple(2 * c for c in grid.shape)
    n = grid.n if grid.mode == "radial-n" else None
    return build_grid(grid.mode, extents=grid.extents, cells=cells, n=n)


def _cmd_gn_test(args: argparse.Namespace) -> int:
    try:
        spec = RegimeSpec(n=args.n, theta=args.theta, p=args.p)
        regime = audit(spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if regime.chosen_q_f1 is None or regime.chosen_q is None:
        raise ConfigError(
            "gn-test needs a regime with entropy witnesses "
            f"(n={args.n}, theta={args.theta}, p={args.p} has route "
            f"{regime.route!r}); pick a subcritical entropy-route point"
        )
    q1, q2 = regime.chosen_q_f1, regime.chosen_q
    try:
        sets = {
            "density-step": density_step_set(args.n, args.p, q1),
            "signal-l2-step": signal_l2_step_set(args.n, args.theta, q1),
            "signal-grad-step": signal_grad_step_set(args.n, args.theta, q2),
        }
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    second = GN2Exponents(p_hat=2.0, q_hat=2.0, r_hat=2.0, s_hat=2.0, n=args.n)

    cells = args.cells if args.cells else (256 if args.n != 2 else 64)
    coarse = _gn_test_grid(args.n, cells)
    fine = _refined(coarse)

    all_stable = True
    set_reports = {}
    for name, exps in sets.items():
        c1 = gn_constant_estimate(coarse, exps, size=args.ensemble_size, seed=args.seed)
        c2 = gn_constant_estimate(fine, exps, size=args.ensemble_size, seed=args.seed)
        stability = abs(c2 - c1) / c1
        stable = bool(math.isfinite(c1) and math.isfinite(c2) and stability <= GN_STABILITY_RTOL)
        all_stable = all_stable and stable
        set_reports[name] = {
            "exponents": exps.to_dict(),
            "C_est": c1,
            "C_est_refined": c2,
            "stability": stability,
            "stable": stable,
        }
    c1 = gn2_constant_estimate(coarse, second, size=args.ensemble_size, seed=args.seed)
    c2 = gn2_constant_estimate(fine, second, size=args.ensemble_size, seed=args.seed)
    stability = abs(c2 - c1) / c1
    stable = bool(math.isfinite(c1) and math.isfinite(c2) and stability <= GN_STABILITY_RTOL)
    all_stable = all_stable and stable
    set_reports["second-form-reference"] = {
        "exponents": second.to_dict(),
        "C_est": c1,
        "C_est_refined": c2,
        "stability": stability,
        "stable": stable,
    }
    pw1 = poincare_constant_estimate(coarse, size=args.ensemble_size, seed=args.seed)
    pw2 = poincare_constant_estimate(fine, size=args.ensemble_size, seed=args.seed)
    pw_stability = abs(pw2 - pw1) / pw1
    all_stable = all_stable and pw_stability <= GN_STABILITY_RTOL

    payload = {
        "tool": _tool_stamp(),
        "regime": {
            "n": args.n,
            "theta": args.theta,
            "p": args.p,
            "q1": q1,
            "q2": q2,
            "route": regime.route,
        },
        "grid": {"mode": coarse.mode, "cells": list(coarse.shape), "refined": list(fine.shape)},
        "ensemble": {
            "size": args.ensemble_size,
            "seed": args.seed,
            "version": ENSEMBLE_VERSION,
        },
        "stability_rtol": GN_STABILITY_RTOL,
        "sets": set_reports,
        "poincare": {"C_est": pw1, "C_est_refined": pw2, "stability": pw_stability},
        "pass": all_stable,
    }
    _print_json(payload)
    return 0 if all_stable else 1


# -- report ------------------------------------------------------------------


def _cmd_report(args: argparse.Namespace) -> int:
    sweep_dir = Path(args.sweep_dir)
    manifest_path = sweep_dir / "sweep.json"
    if not manifest_path.is_file():
        raise ConfigError(f"no sweep manifest at {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid sweep manifest: {exc}") from exc
    results = []
    missing = []
    for entry in manifest.get("points", []):
        pid = entry["point_id"]
        path = sweep_dir / f"{pid}.json"
        if not path.is_file():
            missing.append(pid)
            continue
        results.append(json.loads(path.read_text(encoding="utf-8")))
    if not results:
        raise ConfigError(f"sweep at {sweep_dir} has no completed points")

    from .sweep import regime_map_csv

    write_atomic(sweep_dir / "regime_map.csv", regime_map_csv(results))
    print(regime_map_summary(results), end="")
    if missing:
        print(f"NOTE: {len(missing)} point(s) not yet completed (sweep resumable)")
    n_flags = sum(1 for r in results if r["mismatch"])
    print(f"regime map written to {sweep_dir / 'regime_map.csv'}")
    return 0 if n_flags == 0 else 1


# -- parser ------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="fluxks", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"fluxks {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    sim = sub.add_parser("simulate", help="run one configuration and write functional CSV")
    sim.add_argument("--config", required=True, help="JSON run configuration")
    sim.add_argument("--out", help=f"output directory (default {DEFAULT_OUT} or $FLUXKS_OUT)")
    sim.add_argument(
        "--snapshots", action="store_true", help="also dump sampled state snapshots"
    )
    sim.set_defaults(func=_cmd_simulate)

    swp = sub.add_parser("sweep", help="run a parameter sweep (resumable)")
    swp.add_argument("--config", required=True, help="JSON sweep specification")
    swp.add_argument("--out", help="output directory (default fluxks-sweep or $FLUXKS_OUT)")
    swp.add_argument("--parallelism", type=int, default=1, help="process count (default 1)")
    swp.add_argument("--no-resume", action="store_true", help="re-run completed points")
    swp.set_defaults(func=_cmd_sweep)

    aud = sub.add_parser("audit", help="print the exponent-algebra audit as JSON")
    aud.add_argument("--n", type=int, required=True, help="ambient dimension")
    aud.add_argument("--theta", type=float, required=True, help="production exponent")
    aud.add_argument("--p", type=float, help="flux exponent (absolute)")
    aud.add_argument(
        "--p-fraction",
        type=float,
        help="flux exponent as an affine fraction of (1, p_c)",
    )
    aud.set_defaults(func=_cmd_audit)

    gnt = sub.add_parser("gn-test", help="estimate interpolation-inequality constants")
    gnt.add_argument("--n", type=int, default=1, help="ambient dimension (default 1)")
    gnt.add_argument("--theta", type=float, default=2.0, help="production exponent (default 2)")
    gnt.add_argument("--p", type=float, default=1.5, help="flux exponent (default 1.5)")
    gnt.add_argument("--cells", type=int, help="cells per axis (default 256; 64 in 2d)")
    gnt.add_argument("--ensemble-size", type=int, default=1000, help="members (default 1000)")
    gnt.add_argument("--seed", type=int, default=0, help="ensemble seed (default 0)")
    gnt.set_defaults(func=_cmd_gn_test)

    rep = sub.add_parser("report", help="render a sweep directory into a regime map")
    rep.add_argument("--sweep-dir", required=True, help="directory written by `fluxks sweep`")
    rep.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_help()
            return 3
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FluxksError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
