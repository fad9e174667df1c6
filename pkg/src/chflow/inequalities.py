"""Ratio checks for the functional inequalities obeyed by the flow.

Each check evaluates one inequality on a diagnostics series or a trajectory
and reports the per-snapshot ratio together with the worst (largest, or for
two-sided estimates also smallest) constant observed.  Snapshots whose
denominator falls below DENOM_FLOOR are excluded from the ratio and counted;
below that threshold a double-precision quotient carries no information.

Exponential interaction terms of the form exp(-L/C) enter several estimates
with an unspecified constant.  We use the conservative surrogate exp(-L/64)
as an additive slack on the small side of the affected ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eigh

from .errors import (EigsNotConverged, PhaseHypothesisUnmet, WindowTooShort)
from .functionals import dissipation, energy
from .grid import Field, Grid, deriv, integrate
from .manifold import project_bump, project_glued
from .potential import PotentialSpec, quartic
from .profiles import BumpProfile, KinkProfile, kink_energy

DENOM_FLOOR = 1e-14


def _slack(L: float) -> float:
    return math.exp(-L / 64.0)


@dataclass
class InequalityReport:
    """Per-snapshot ratio series for one inequality.

    worst is the largest ratio (the measured constant); worst_low is the
    smallest, reported for two-sided estimates and NaN otherwise.
    """

    name: str
    times: np.ndarray
    ratios: np.ndarray
    worst: float
    cap: float
    passed: bool
    excluded: int = 0
    worst_low: float = float("nan")
    metadata: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "worst": self.worst,
            "worst_low": self.worst_low,
            "cap": self.cap,
            "passed": self.passed,
            "excluded": self.excluded,
            "n_ratios": int(np.sum(np.isfinite(self.ratios))),
            "metadata": dict(self.metadata),
        }


def _gap_and_mass(rec):
    """Phase-relevant energy gap and excess mass of a diagnostics record."""
    if np.isfinite(rec.gap_bump) and np.isfinite(rec.V):
        return rec.gap_bump, rec.V
    if np.isfinite(rec.gap_glued) and np.isfinite(rec.V_tilde):
        return rec.gap_glued, rec.V_tilde
    if np.isfinite(rec.V_minus):
        return rec.E, rec.V_minus
    return float("nan"), float("nan")


def check_nash(series, cap: float = 10.0, gap_gate: Optional[float] = None,
               metadata: Optional[dict] = None) -> InequalityReport:
    """Interpolation estimate gap <= C D^{1/3} (V+1)^{4/3}.

    Snapshots with gap above `gap_gate` (default 4 times the kink energy, the
    smallness hypothesis of the estimate) are excluded along with those whose
    denominator is below the floor.
    """
    if gap_gate is None:
        gap_gate = 4.0 * kink_energy(quartic())
    times, ratios = [], []
    excluded = 0
    for rec in series:
        gap, V = _gap_and_mass(rec)
        if not (np.isfinite(gap) and np.isfinite(V) and np.isfinite(rec.D)):
            excluded += 1
            continue
        if gap > gap_gate or gap <= 0.0:
            excluded += 1
            continue
        denom = rec.D ** (1.0 / 3.0) * (V + 1.0) ** (4.0 / 3.0)
        if denom <= DENOM_FLOOR:
            excluded += 1
            continue
        times.append(rec.t)
        ratios.append(gap / denom)
    times = np.asarray(times)
    ratios = np.asarray(ratios)
    worst = float(np.max(ratios)) if ratios.size else 0.0
    return InequalityReport(name="nash", times=times, ratios=ratios,
                            worst=worst, cap=cap, passed=worst <= cap,
                            excluded=excluded, metadata=metadata or {})


def _h1_squared(g: Grid, f: np.ndarray) -> float:
    fx = deriv(g, f, 1)
    return integrate(g, f * f + fx * fx)


def _d_upper(g: Grid, f: np.ndarray) -> float:
    f1 = deriv(g, f, 1)
    f2 = deriv(g, f, 2)
    f3 = deriv(g, f, 3)
    return integrate(g, f1 * f1 + f2 * f2 + f3 * f3)


def check_eed(traj, phase: str, p: PotentialSpec,
              bump: Optional[BumpProfile] = None,
              L: Optional[float] = None,
              eps: float = 0.1,
              cap: float = 25.0,
              metadata: Optional[dict] = None) -> InequalityReport:
    """Two-sided comparison of the energy gap with the H^1 distance squared.

    phase selects the reference object: "bump" compares against the closest
    shifted bump (hypothesis: gap <= eps/L), "glued" against the fitted glued
    kink pair (with additive exp(-L/64) slack), "minus_one" against the
    constant state -1.  Also records the H^3-type upper ratio against D and,
    in the glued phase, gap_glued / (L^2 D).
    """
    phase = phase.lower()
    if phase not in ("bump", "glued", "minus_one"):
        raise ValueError("phase must be 'bump', 'glued', or 'minus_one'")
    g = traj.grid
    if L is None:
        L = g.sidelength
    slack = _slack(L) if phase == "glued" else 0.0

    times, ratios, d_ratios, ld_ratios = [], [], [], []
    excluded = 0
    gate_failures = 0
    for t, fld in traj.snapshot_fields():
        if phase == "bump":
            if bump is None:
                raise ValueError("bump phase needs the reference profile")
            pr = project_bump(fld, bump)
            ref = bump.translated(pr.shift)
            e_ref = bump.energy
        elif phase == "glued":
            try:
                pr = project_glued(fld, L, p)
            except Exception:
                excluded += 1
                continue
            ref = pr.glued.value(g.x)
            ref_fld = Field(g, ref)
            e_ref = energy(ref_fld, p)
        else:
            ref = np.full(g.n, -1.0)
            e_ref = float(p.value(-1.0)) * g.period
        f = fld.values - ref
        gap = energy(fld, p) - e_ref
        if phase == "bump" and gap > eps / L:
            gate_failures += 1
            excluded += 1
            continue
        h1 = _h1_squared(g, f)
        if abs(gap) + slack <= DENOM_FLOOR or h1 <= DENOM_FLOOR:
            excluded += 1
            continue
        times.append(t)
        ratios.append(h1 / (abs(gap) + slack))
        D = dissipation(fld, p)
        if D > DENOM_FLOOR:
            d_ratios.append(_d_upper(g, f) / D)
            if phase == "glued":
                ld_ratios.append((gap + slack) / (L * L * D))
    if not times:
        if phase == "bump" and gate_failures > 0:
            raise PhaseHypothesisUnmet(
                f"no snapshot satisfies the bump-phase gate gap <= {eps}/L")
        raise PhaseHypothesisUnmet(f"no usable snapshot in phase '{phase}'")
    times = np.asarray(times)
    ratios = np.asarray(ratios)
    worst = float(np.max(ratios))
    worst_low = float(np.min(ratios))
    passed = worst <= cap and worst_low >= 1.0 / cap
    md = dict(metadata or {})
    md.update({"phase": phase, "L": L, "slack": slack,
               "gate_failures": gate_failures,
               "d_upper_worst": float(np.max(d_ratios)) if d_ratios else float("nan"),
               "l2d_worst": float(np.max(ld_ratios)) if ld_ratios else float("nan")})
    return InequalityReport(name=f"eed_{phase}", times=times, ratios=ratios,
                            worst=worst, cap=cap, passed=passed,
                            excluded=excluded, worst_low=worst_low,
                            metadata=md)


def algebraic_window(times: np.ndarray, gaps: np.ndarray,
                     slope_band=(-0.9, -0.2)) -> tuple:
    """Detect the algebraic-decay window of a gap series.

    Returns (i0, i1) slice bounds of the longest log-log run whose local
    slope stays inside slope_band.  Raises WindowTooShort if the best run
    spans less than one decade in time.
    """
    m = (times > 0) & (gaps > 0) & np.isfinite(gaps)
    if np.sum(m) < 4:
        raise WindowTooShort("fewer than 4 positive snapshots")
    lt, lg = np.log(times[m]), np.log(gaps[m])
    idx = np.nonzero(m)[0]
    slope = np.gradient(lg, lt)
    good = (slope >= slope_band[0]) & (slope <= slope_band[1])
    best, cur = (0, 0), None
    for j, ok in enumerate(good):
        if ok:
            cur = j if cur is None else cur
            if lt[j] - lt[cur] > lt[best[1]] - lt[best[0]]:
                best = (cur, j)
        else:
            cur = None
    i0, i1 = best
    if lt[i1] - lt[i0] < math.log(10.0):
        raise WindowTooShort(
            f"algebraic run spans {(lt[i1] - lt[i0]) / math.log(10.0):.2f} decades")
    return int(idx[i0]), int(idx[i1])


def check_ode_decay(series, cap: float = 50.0,
                    metadata: Optional[dict] = None) -> InequalityReport:
    """Algebraic decay gap ~ t^{-1/2} on the auto-detected window.

    Reports the fitted log-log slope and the constant sup gap t^{1/2} / V_T^2
    with V_T the largest excess mass seen along the series.
    """
    times = np.array([rec.t for rec in series])
    gaps = np.array([_gap_and_mass(rec)[0] for rec in series])
    masses = np.array([_gap_and_mass(rec)[1] for rec in series])
    i0, i1 = algebraic_window(times, gaps)
    tw, gw = times[i0:i1 + 1], gaps[i0:i1 + 1]
    A = np.vstack([np.log(tw), np.ones(tw.size)]).T
    coef, *_ = np.linalg.lstsq(A, np.log(gw), rcond=None)
    slope = float(coef[0])
    VT = float(np.nanmax(masses)) if np.any(np.isfinite(masses)) else 1.0
    ratios = gw * np.sqrt(tw) / max(VT, 1.0) ** 2
    worst = float(np.max(ratios))
    md = dict(metadata or {})
    md.update({"slope": slope, "window": (float(tw[0]), float(tw[-1])),
               "V_T": VT})
    return InequalityReport(name="ode_decay", times=tw, ratios=ratios,
                            worst=worst, cap=cap, passed=worst <= cap,
                            excluded=len(series) - (i1 - i0 + 1),
                            metadata=md)


def _log_interp(times, values, t):
    """Log-log interpolation of a positive series at time t."""
    lt = np.log(times)
    lv = np.log(values)
    return float(np.exp(np.interp(math.log(t), lt, lv)))


def check_dissipation_bounds(series, cap: float = 20.0, gamma: float = 0.75,
                             metadata: Optional[dict] = None) -> InequalityReport:
    """Bounds relating the dissipation to the energy gap history.

    (i)  D(t) <= C max{gap(t/2)^2, gap(t/2)/t}, with gap(t/2) read off by
         log-log interpolation of the snapshot series;
    (ii) dD/dt <= C D^{3/2} by centered differences, restricted to windows
         where D is increasing (the estimate is one-sided);
    (iii) the time integral of D^gamma against V_T^{4(1-gamma)}.
    """
    times = np.array([rec.t for rec in series])
    Ds = np.array([rec.D for rec in series])
    gaps = np.array([_gap_and_mass(rec)[0] for rec in series])
    masses = np.array([_gap_and_mass(rec)[1] for rec in series])

    pos = (times > 0) & (gaps > 0) & np.isfinite(gaps)
    tp, gp = times[pos], gaps[pos]
    ratios, rts = [], []
    excluded = 0
    for t, D in zip(times, Ds):
        if tp.size == 0 or t <= 0 or t / 2.0 < tp[0]:
            excluded += 1
            continue
        gh = _log_interp(tp, gp, min(t / 2.0, tp[-1]))
        denom = max(gh * gh, gh / t)
        if denom <= DENOM_FLOOR or not np.isfinite(D):
            excluded += 1
            continue
        rts.append(t)
        ratios.append(D / denom)
    ratios = np.asarray(ratios)
    rts = np.asarray(rts)
    worst = float(np.max(ratios)) if ratios.size else 0.0

    # (ii) growth of D against D^{3/2}, increasing windows only
    growth = []
    for j in range(1, times.size - 1):
        if Ds[j + 1] > Ds[j] > Ds[j - 1] and Ds[j] > DENOM_FLOOR:
            dDdt = (Ds[j + 1] - Ds[j - 1]) / (times[j + 1] - times[j - 1])
            growth.append(dDdt / Ds[j] ** 1.5)
    VT = float(np.nanmax(masses)) if np.any(np.isfinite(masses)) else 1.0
    finite = np.isfinite(Ds) & (Ds >= 0)
    int_dg = float(np.trapezoid(Ds[finite] ** gamma, times[finite]))
    int_ratio = int_dg / max(VT, 1.0) ** (4.0 * (1.0 - gamma))

    md = dict(metadata or {})
    md.update({"growth_worst": float(np.max(growth)) if growth else float("nan"),
               "integral_ratio": int_ratio, "gamma": gamma, "V_T": VT})
    return InequalityReport(name="dissipation_bounds", times=rts, ratios=ratios,
                            worst=worst, cap=cap, passed=worst <= cap,
                            excluded=excluded, metadata=md)


def check_hardy(f: Field, v: KinkProfile, side: str = "plus") -> float:
    """Weighted Poincare ratio int f^2/(x^2+1) / int f_x^2 on a half-domain.

    The component of f along v_x over the half-domain is removed first, which
    is the orthogonality hypothesis of the estimate.  Returns 0 for f = 0.
    """
    g = f.grid
    x = g.x
    if side == "plus":
        m = x >= 0.0
    elif side == "minus":
        m = x <= 0.0
    else:
        raise ValueError("side must be 'plus' or 'minus'")
    vx = v.d1(x)
    fv = f.values.copy()
    denom_p = g.dx * np.sum(vx[m] * vx[m])
    if denom_p > DENOM_FLOOR:
        coef = g.dx * np.sum(fv[m] * vx[m]) / denom_p
        fv = fv - coef * vx
    fx = deriv(g, fv, 1)
    num = g.dx * np.sum(fv[m] ** 2 / (x[m] ** 2 + 1.0))
    den = g.dx * np.sum(fx[m] ** 2)
    if den <= DENOM_FLOOR:
        return 0.0
    return float(num / den)


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray  # five smallest in magnitude, by |lambda|
    lambda1: float  # translation mode
    overlap1: float  # normalized overlap of its eigenvector with w_x
    lambda2: float  # interface-interaction (breathing) mode
    lambda3: float
    L: float
    n: int

    def to_dict(self) -> dict:
        return {"eigenvalues": [float(v) for v in self.eigenvalues],
                "lambda1": self.lambda1, "overlap1": self.overlap1,
                "lambda2": self.lambda2, "lambda3": self.lambda3,
                "L": self.L, "n": self.n}


def check_linearization_spectrum(w: BumpProfile, p: PotentialSpec) -> SpectrumReport:
    """Low-lying spectrum of the linearization A = -d_xx + G''(w).

    The lowest modes are the translation mode (exactly zero in the
    continuum), the exponentially small interface-interaction mode, and a
    gapped mode.  The modes are ranked by |lambda| because the interaction
    eigenvalue can sit on either side of zero.
    """
    g = w.grid
    if g.sidelength < 16.0:
        raise ValueError("spectrum check needs L >= 16")
    n = g.n
    eye = np.eye(n)
    D2 = np.fft.irfft(-(g.k ** 2)[:, None] * np.fft.rfft(eye, axis=0),
                      axis=0, n=n)
    A = -D2 + np.diag(p.d2(w.samples.values))
    A = 0.5 * (A + A.T)
    try:
        vals, vecs = eigh(A)
    except np.linalg.LinAlgError as exc:
        raise EigsNotConverged(str(exc)) from exc
    order = np.argsort(np.abs(vals))[:5]
    vals5 = vals[order]
    vecs5 = vecs[:, order]
    wx = deriv(g, w.samples.values, 1)
    wx = wx / np.sqrt(np.sum(wx * wx))
    # The translation and interaction modes become numerically degenerate for
    # large L, so eigh may return an arbitrary rotation of the pair.  Rotate
    # within the 2-dim eigenspace: the translation mode is the projection of
    # w_x onto the span, the interaction mode its orthogonal complement.
    P = vecs5[:, :2]
    b = P.T @ wx
    overlap1 = float(np.linalg.norm(b))
    bn = b / max(overlap1, 1e-300)
    lam1 = float(bn @ (vals5[:2] * bn))
    b_perp = np.array([-bn[1], bn[0]])
    lam2 = float(b_perp @ (vals5[:2] * b_perp))
    return SpectrumReport(eigenvalues=vals5, lambda1=lam1,
                          overlap1=overlap1,
                          lambda2=lam2, lambda3=float(vals5[2]),
                          L=g.sidelength, n=n)
