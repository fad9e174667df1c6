"""Command-line surface: run, check, fit, report, profile.

Exit codes: 0 success, 2 configuration error, 3 runtime abort, 4 failed
acceptance gate (`check`).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import errors
from .config_io import (config_hash, emit_config, emit_plot_data,
                        emit_profile, emit_report, emit_series,
                        make_manifest, parse_config, parse_series)
from .experiments import build_initial, detect_phases, fit_rate, run
from .functionals import energy
from .grid import Field
from .inequalities import (check_dissipation_bounds, check_nash,
                           check_ode_decay)
from .potential import quartic

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_CHECK = 4

CONFIG_ERRORS = (errors.ConfigError, FileNotFoundError, IsADirectoryError)


def _outdir(args, s) -> Path:
    out = Path(args.out) if args.out else Path(f"out-{s.id}")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_and_emit(s, out: Path):
    t0 = time.time()
    traj, series, init = run(s)
    wall = time.time() - t0
    csv_path = out / "series.csv"
    emit_series(series, csv_path)
    dats = emit_plot_data(series, out / "plots")
    (out / "scenario.cfg").write_text(emit_config(s), encoding="utf-8")
    manifest = make_manifest(s, traj, wall, {
        "series": str(csv_path), "plots": dats,
        "scenario": str(out / "scenario.cfg"),
    })
    emit_report(manifest.to_dict(), out / "manifest.json")
    return traj, series, init


def cmd_run(args) -> int:
    s = parse_config(args.config)
    out = _outdir(args, s)
    _run_and_emit(s, out)
    print(f"wrote {out}/series.csv")
    return EXIT_OK


def _gate_failures(s, traj, series, init) -> list:
    """Per-run acceptance gates checked by the `check` subcommand."""
    fails = []
    if traj.mean_drift > 1e-13:
        fails.append(f"mean drift {traj.mean_drift:.3e} > 1e-13")
    if traj.max_energy_increase > 1e-12:
        fails.append(f"energy increase {traj.max_energy_increase:.3e}")
    w0cap = 10.0 * (s.w0_target + 1.0)
    if s.problem == "TorusBump":
        v = np.array([r.V for r in series], dtype=float)
        if np.any(np.isfinite(v)) and np.nanmax(v) > w0cap:
            fails.append(f"sup V = {np.nanmax(v):.2f} > {w0cap:.2f}")
        rep = check_nash(series)
        if not rep.passed:
            fails.append(f"nash worst {rep.worst:.2f} > {rep.cap}")
    elif s.problem == "LineBump":
        vt = np.array([r.V_tilde for r in series if r.trusted], dtype=float)
        if np.any(np.isfinite(vt)) and np.nanmax(vt) > w0cap:
            fails.append(f"sup V_tilde = {np.nanmax(vt):.2f} > {w0cap:.2f}")
    else:
        vm = np.array([r.V_minus for r in series], dtype=float)
        cap = 10.0 * (init.vminus0 + 1.0)
        if np.nanmax(vm) > cap:
            fails.append(f"sup V_minus = {np.nanmax(vm):.2f} > {cap:.2f}")
    return fails


def cmd_check(args) -> int:
    s = parse_config(args.config)
    out = _outdir(args, s)
    traj, series, init = _run_and_emit(s, out)
    fails = _gate_failures(s, traj, series, init)
    for f in fails:
        print(f"FAIL {f}")
    if fails:
        return EXIT_CHECK
    print(f"all gates passed for {s.id}")
    return EXIT_OK


def cmd_fit(args) -> int:
    series = parse_series(args.csv)
    t = series.column("t")
    v = series.column(args.column)
    window = tuple(args.window) if args.window else None
    res = fit_rate(t, v, window=window, model=args.model)
    print(json.dumps({"model": res.model, "rate": res.rate,
                      "prefactor": res.prefactor, "r2": res.r2,
                      "window": list(res.window), "npoints": res.npoints}))
    return EXIT_OK


def cmd_report(args) -> int:
    """Pure post-processing of an output directory; no re-simulation."""
    d = Path(args.dir)
    series = parse_series(d / "series.csv")
    s = parse_config(d / "scenario.cfg")
    report = {"scenario_id": s.id, "config_hash": config_hash(s)}
    try:
        report["phases"] = detect_phases(series, s).to_dict()
    except errors.InsufficientData as exc:
        report["phases"] = {"error": str(exc)}
    checks = {}
    for name, fn in (("nash", check_nash), ("ode_decay", check_ode_decay),
                     ("dissipation_bounds", check_dissipation_bounds)):
        try:
            checks[name] = fn(series, metadata={"scenario": s.id}).to_dict()
        except Exception as exc:
            checks[name] = {"error": f"{type(exc).__name__}: {exc}"}
    report["inequalities"] = checks
    emit_report(report, d / "report.json")
    print(f"wrote {d}/report.json")
    return EXIT_OK


def cmd_profile(args) -> int:
    s = parse_config(args.config)
    out = _outdir(args, s)
    p = quartic()
    init = build_initial(s, p)
    emit_profile(init.u0, out / "initial.csv")
    emit_profile(Field(init.grid, init.profile_values), out / "profile.csv")
    print(f"wrote {out}/profile.csv (E = {energy(init.u0, p):.6f})")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chflow",
                                 description="Cahn-Hilliard relaxation lab")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and emit diagnostics")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None)
    p_run.set_defaults(fn=cmd_run)

    p_check = sub.add_parser("check", help="run and assert acceptance gates")
    p_check.add_argument("config")
    p_check.add_argument("--out", default=None)
    p_check.set_defaults(fn=cmd_check)

    p_fit = sub.add_parser("fit", help="fit a rate law to a diagnostics CSV")
    p_fit.add_argument("csv")
    p_fit.add_argument("--model", choices=["PowerLaw", "Exponential"],
                       default="PowerLaw")
    p_fit.add_argument("--column", default="gap_bump")
    p_fit.add_argument("--window", nargs=2, type=float, default=None)
    p_fit.set_defaults(fn=cmd_fit)

    p_rep = sub.add_parser("report", help="post-process an output directory")
    p_rep.add_argument("dir")
    p_rep.set_defaults(fn=cmd_report)

    p_prof = sub.add_parser("profile", help="emit initial profiles only")
    p_prof.add_argument("config")
    p_prof.add_argument("--out", default=None)
    p_prof.set_defaults(fn=cmd_profile)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except errors.ChflowError as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
