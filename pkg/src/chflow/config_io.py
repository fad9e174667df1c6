"""Scenario config files, diagnostics CSV, report JSON, and plot export.

Config files are UTF-8 `key = value` lines with `#` comments and no
sections.  emit_config writes a canonical form (fixed key order, shortest
round-trip floats), so emit(parse(f)) is a fixed point and its digest is a
stable identifier of the scenario.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigSyntax, ConstraintViolation, UnknownKey
from .experiments import DiagnosticsSeries, Scenario
from .functionals import DiagnosticsRecord

CSV_HEADER = ("t,E,D,gap_bump,gap_glued,V,V_tilde,V_minus,"
              "shift_c,zero_a,zero_b,xi_sup,linf_f,trusted")

# config key -> (Scenario field, type); order fixes the canonical emission
CONFIG_KEYS = {
    "id": ("id", str),
    "problem": ("problem", str),
    "L": ("L", float),
    "n": ("n", int),
    "m": ("m", float),
    "lambda": ("lam", float),
    "dist_shape": ("dist_shape", str),
    "dist_mass": ("dist_mass", float),
    "dist_width": ("dist_width", float),
    "dist_offset": ("dist_offset", float),
    "w0_target": ("w0_target", float),
    "eps": ("eps", float),
    "t_end": ("t_end", float),
    "dt": ("dt", float),
    "seed": ("seed", int),
    "noise_amplitude": ("noise_amplitude", float),
    "snapshots_per_decade": ("snapshots_per_decade", int),
    "t_min_snapshot": ("t_min_snapshot", float),
    "eps_cfg": ("eps_cfg", float),
}

_POSITIVE = {"L", "n", "t_end", "dt", "lambda", "dist_width",
             "snapshots_per_decade", "t_min_snapshot", "eps_cfg"}
_NONNEGATIVE = {"dist_mass", "w0_target", "eps", "noise_amplitude"}


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(path) -> Scenario:
    """Parse a scenario file; unknown keys and malformed lines are errors."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_config_text(text)


def parse_config_text(text: str) -> Scenario:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigSyntax(f"line {lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in CONFIG_KEYS:
            raise UnknownKey(key)
        field, typ = CONFIG_KEYS[key]
        try:
            parsed = typ(val)
        except ValueError as exc:
            raise ConfigSyntax(f"line {lineno}: bad value for {key}: {val!r}") from exc
        if key in _POSITIVE and parsed <= 0:
            raise ConstraintViolation(key)
        if key in _NONNEGATIVE and parsed < 0:
            raise ConstraintViolation(key)
        values[field] = parsed
    if "problem" not in values:
        raise ConfigSyntax("missing required key 'problem'")
    values.setdefault("L", 32.0)
    values.setdefault("n", 1024)
    values.setdefault("id", f"{values['problem'].lower()}-l{values['L']:g}")
    try:
        return Scenario(**values)
    except (ValueError, TypeError) as exc:
        raise ConstraintViolation(str(exc)) from exc


def emit_config(s: Scenario) -> str:
    """Canonical config text for a scenario (fixed key order, all keys)."""
    lines = []
    for key, (field, _typ) in CONFIG_KEYS.items():
        lines.append(f"{key} = {_fmt(getattr(s, field))}")
    return "\n".join(lines) + "\n"


def config_hash(s: Scenario) -> str:
    return hashlib.sha256(emit_config(s).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# diagnostics CSV


def _cell(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return repr(float(x))


def emit_series(series, path) -> None:
    """Write the diagnostics series as CSV with the fixed 14-column header."""
    lines = [CSV_HEADER]
    for r in series:
        lines.append(",".join([
            _cell(r.t), _cell(r.E), _cell(r.D), _cell(r.gap_bump),
            _cell(r.gap_glued), _cell(r.V), _cell(r.V_tilde),
            _cell(r.V_minus), _cell(r.shift_c), _cell(r.zero_a),
            _cell(r.zero_b), _cell(r.xi_sup), _cell(r.linf_f),
            "1" if r.trusted else "0",
        ]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_series(path) -> DiagnosticsSeries:
    """Read a diagnostics CSV back into a series (bit-exact round trip)."""
    lines = Path(path).read_text(encoding="utf-8").strip().split("\n")
    if lines[0] != CSV_HEADER:
        raise ConfigSyntax(f"unexpected CSV header: {lines[0]!r}")
    series = DiagnosticsSeries()
    for line in lines[1:]:
        cells = line.split(",")
        if len(cells) != 14:
            raise ConfigSyntax(f"expected 14 columns, got {len(cells)}")
        vals = [float(c) for c in cells[:13]]
        rec = DiagnosticsRecord(
            t=vals[0], E=vals[1], D=vals[2], gap_bump=vals[3],
            gap_glued=vals[4], V=vals[5], V_tilde=vals[6], V_minus=vals[7],
            shift_c=vals[8], xi_sup=vals[11], linf_f=vals[12],
            trusted=cells[13] == "1",
        )
        if not (math.isnan(vals[9]) and math.isnan(vals[10])):
            rec.zeros = (vals[9], vals[10])
        series.records.append(rec)
    return series


# ---------------------------------------------------------------------------
# reports, manifests, and plot data


@dataclass
class RunManifest:
    scenario_id: str
    config_hash: str
    code_version: str
    grid: dict
    solver: dict
    outputs: dict
    wall_clock: float
    accepted_steps: int
    rejected_steps: int

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "config_hash": self.config_hash,
            "code_version": self.code_version,
            "grid": self.grid,
            "solver": self.solver,
            "outputs": self.outputs,
            "wall_clock": self.wall_clock,
            "accepted_steps": self.accepted_steps,
            "rejected_steps": self.rejected_steps,
        }


def make_manifest(s: Scenario, traj, wall_clock: float, outputs: dict) -> RunManifest:
    from . import __version__

    return RunManifest(
        scenario_id=s.id,
        config_hash=config_hash(s),
        code_version=__version__,
        grid={"sidelength": s.sidelength, "n": s.n, "dx": s.grid().dx},
        solver={"dt": s.dt, "t_end": s.t_end,
                "snapshots_per_decade": s.snapshots_per_decade},
        outputs=outputs,
        wall_clock=wall_clock,
        accepted_steps=traj.accepted_steps,
        rejected_steps=traj.rejected_steps,
    )


def emit_report(report: dict, path) -> None:
    """Write a report as JSON, preserving insertion order of keys."""
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=False) + "\n",
                          encoding="utf-8")


def emit_plot_data(series, outdir) -> list:
    """gnuplot-ready two-column .dat files, one per diagnostic column."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    t = np.array([r.t for r in series])
    for name in ("E", "D", "gap_bump", "gap_glued", "V", "V_tilde",
                 "V_minus", "shift_c", "xi_sup", "linf_f"):
        vals = np.array([getattr(r, name) for r in series], dtype=float)
        path = outdir / f"{name}.dat"
        with open(path, "w", encoding="utf-8") as fh:
            for ti, vi in zip(t, vals):
                fh.write(f"{_cell(ti)} {_cell(vi)}\n")
        written.append(str(path))
    return written


def emit_profile(field, path) -> None:
    """Write grid samples of a profile as x,value CSV."""
    g = field.grid
    lines = ["x,value"]
    for x, v in zip(g.x, field.values):
        lines.append(f"{repr(float(x))},{repr(float(v))}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
