"""Projection onto the slow manifolds and zero tracking.

project_bump minimizes the L^2 distance to shifted bumps: a coarse scan over
all grid shifts via one FFT cross-correlation, followed by Newton refinement
of the stationarity condition int (u - w_c) w_cx dx = 0.  project_glued
performs two independent shift optimizations, for the increasing kink on the
left half-domain and the decreasing kink on the right half-domain, in the
canonical frame recentered between the field's two outermost zeros.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateProjection, NoValidZeros, SeparationViolated
from .grid import Field, Grid, integrate, interpolate, translate, zero_crossings
from .profiles import BumpProfile, GluedKinkProfile, glue_kinks, kink


@dataclass
class ProjectionResult:
    handle: object  # shifted-profile descriptor
    shift: float
    objective: float  # L2 distance achieved
    orthogonality: float
    unique: bool
    glued: Optional[GluedKinkProfile] = None


@dataclass
class ZeroSet:
    positions: np.ndarray
    t: float = 0.0


def find_zeros(u: Field, t: float = 0.0) -> ZeroSet:
    """All sign changes of the spectral interpolant, bisection-refined."""
    return ZeroSet(positions=zero_crossings(u.grid, u.values), t=t)


def _mode_coefficients(grid: Grid, values: np.ndarray) -> np.ndarray:
    c = np.fft.rfft(values) / grid.n
    return c


def _inner_weights(grid: Grid) -> np.ndarray:
    w = np.full(grid.n // 2 + 1, 2.0)
    w[0] = 1.0
    if grid.n % 2 == 0:
        w[-1] = 1.0
    return w


def project_bump(u: Field, w: BumpProfile) -> ProjectionResult:
    """L^2-closest shifted bump w(. - c) to u."""
    g = u.grid
    if w.grid is not g and (w.grid.sidelength != g.sidelength or w.grid.n != g.n):
        raise ValueError("bump must live on the same grid as the field")
    n = g.n
    uv, wv = u.values, w.samples.values

    # cross-correlation over all integer shifts: corr[j] = sum_i u_i w_{i-j}
    corr = np.fft.irfft(np.fft.rfft(uv) * np.conj(np.fft.rfft(wv)), n=n)
    nu2 = float(np.sum(uv * uv))
    nw2 = float(np.sum(wv * wv))
    obj2 = g.dx * (nu2 + nw2 - 2.0 * corr)  # squared distances per shift

    spread = float(np.max(obj2) - np.min(obj2))
    flat = np.sum(obj2 <= np.min(obj2) + 1e-12) / n
    if spread <= 1e-12 and flat >= 0.1:
        raise DegenerateProjection("objective flat across >= 10% of shifts")

    j_best = int(np.argmin(obj2))
    shifts = g.dx * np.arange(n)

    # Newton refinement of F(c) = int u w_x(. - c) dx = 0
    cu = _mode_coefficients(g, uv)
    cw = _mode_coefficients(g, wv)
    wts = _inner_weights(g)
    k = g.k

    def F(c):
        # int u w_x(. - c) dx
        ph = np.exp(1j * k * c)
        return g.period * float(np.real(np.sum(wts * cu * (-1j * k) * np.conj(cw) * ph)))

    def dF(c):
        # d/dc of the above: int u (-w_xx(. - c)) dx
        ph = np.exp(1j * k * c)
        return g.period * float(np.real(np.sum(wts * cu * (k * k) * np.conj(cw) * ph)))

    c = shifts[j_best]
    for _ in range(60):
        f, df = F(c), dF(c)
        if abs(df) < 1e-300:
            break
        dc = f / df
        c_new = c - dc
        if abs(dc) < 1e-12:
            c = c_new
            break
        c = c_new
    c = float(g.wrap(c))

    diff = uv - w.translated(c)
    objective = float(np.sqrt(g.dx * np.sum(diff * diff)))
    wx = translate(g, np.fft.irfft(1j * k * np.fft.rfft(wv), n=n), c)
    ortho = abs(integrate(g, diff * wx))

    # uniqueness: second local minimum of the coarse scan within 1% of best
    loc_min = (obj2 < np.roll(obj2, 1)) & (obj2 <= np.roll(obj2, -1))
    vals = np.sort(obj2[loc_min])
    unique = True
    if vals.size >= 2 and vals[0] > 0:
        unique = (vals[1] - vals[0]) / max(vals[0], 1e-300) > 0.01
    elif vals.size >= 2:
        unique = vals[1] > 1e-12

    return ProjectionResult(handle=w, shift=c, objective=objective,
                            orthogonality=float(ortho), unique=unique)


def _half_mask(grid: Grid, side: str):
    """Trapezoid weights and coordinates for a half-domain.

    The two weight vectors sum to one.  On the plus side the sample at
    x = -L plays the role of the endpoint x = +L, so its coordinate is
    remapped accordingly for profile evaluation.
    """
    x = grid.x
    w = np.zeros(grid.n)
    if side == "minus":
        w[(x > -grid.sidelength) & (x < 0.0)] = 1.0
    else:
        w[x > 0.0] = 1.0
    w[np.isclose(x, 0.0)] = 0.5
    w[np.isclose(x, -grid.sidelength)] = 0.5  # x = -L is identified with +L
    xs = x.copy()
    if side == "plus":
        xs[np.isclose(x, -grid.sidelength)] = grid.sidelength
    return w, xs


def _half_inner(grid: Grid, a: np.ndarray, b: np.ndarray, mask: np.ndarray) -> float:
    return float(grid.dx * np.sum(mask * a * b))


def _optimal_kink_shift(grid, uv, vker, side_mask, xs, sign, guess, window=6.0):
    """Minimize ||u - sign * v(. - a)||^2 over the masked half-domain.

    sign = +1 fits the increasing kink, sign = -1 the decreasing one.
    Secant iteration on the stationarity condition h(a) = int (u - s v_a) v_a' = 0.
    """

    def h(a):
        va = vker.value(xs - a)
        vax = vker.d1(xs - a)
        return _half_inner(grid, uv - sign * va, sign * vax, side_mask)

    # coarse scan
    cand = guess + np.linspace(-window, window, 97)
    vals = np.array([abs_obj(grid, uv, vker, side_mask, xs, sign, a) for a in cand])
    a0 = float(cand[int(np.argmin(vals))])

    a, b = a0 - 0.25, a0 + 0.25
    ha, hb = h(a), h(b)
    for _ in range(80):
        if hb == ha:
            break
        a_new = b - hb * (b - a) / (hb - ha)
        a, ha = b, hb
        b = a_new
        hb = h(b)
        if abs(b - a) < 1e-11:
            break
    return float(b), abs(hb)


def abs_obj(grid, uv, vker, mask, xs, sign, a):
    va = vker.value(xs - a)
    d = uv - sign * va
    return _half_inner(grid, d, d, mask)


def project_glued(u: Field, L: float, p=None) -> ProjectionResult:
    """Project onto glued kink profiles: recenter, then fit each half-domain."""
    g = u.grid
    zs = zero_crossings(g, u.values)
    if zs.size < 2:
        raise NoValidZeros(f"found {zs.size} zeros, need at least 2")

    # choose the adjacent zero pair enclosing the dominant positive region
    zz = np.concatenate([zs, [zs[0] + g.period]])
    best, best_mass = None, -np.inf
    for i in range(zs.size):
        a, b = zz[i], zz[i + 1]
        mid = 0.5 * (a + b)
        if interpolate(g, u.values, [g.wrap(mid)])[0] <= 0:
            continue
        mass = (b - a)
        if mass > best_mass:
            best_mass, best = mass, (a, b)
    if best is None:
        raise NoValidZeros("no positive region between zeros")
    a_z, b_z = best
    if (b_z - a_z) < L / 16.0:
        raise SeparationViolated(f"zero separation {b_z - a_z:.2f} below L/16")

    mid = float(g.wrap(0.5 * (a_z + b_z)))
    u_loc = translate(g, u.values, -mid)  # canonical frame: plateau centered at 0

    vker = kink(p, 0.0) if p is not None else _default_kink()
    mask_m, xs_m = _half_mask(g, "minus")
    mask_p, xs_p = _half_mask(g, "plus")
    ga = float(g.wrap(a_z - mid))
    gb = float(g.wrap(b_z - mid))
    alpha_loc, res_a = _optimal_kink_shift(g, u_loc, vker, mask_m, xs_m, +1.0, ga)
    beta_loc, res_b = _optimal_kink_shift(g, u_loc, vker, mask_p, xs_p, -1.0, gb)

    obj2 = abs_obj(g, u_loc, vker, mask_m, xs_m, +1.0, alpha_loc) + \
        abs_obj(g, u_loc, vker, mask_p, xs_p, -1.0, beta_loc)

    on_torus = abs(2.0 * L - g.period) < 1e-9
    q = float(g.wrap(mid)) if on_torus else mid
    glued = glue_kinks(vker.potential, q=q,
                       alpha=float(g.wrap(alpha_loc + mid)) if on_torus else alpha_loc + mid,
                       beta=float(g.wrap(beta_loc + mid)) if on_torus else beta_loc + mid,
                       L=L, on_torus=on_torus)
    return ProjectionResult(handle=glued, shift=q, objective=float(np.sqrt(obj2)),
                            orthogonality=float(max(res_a, res_b)), unique=True,
                            glued=glued)


_KINK_CACHE = {}


def _default_kink():
    from .potential import quartic

    if "quartic" not in _KINK_CACHE:
        _KINK_CACHE["quartic"] = kink(quartic(), 0.0)
    return _KINK_CACHE["quartic"]


@dataclass
class ShiftSeries:
    times: np.ndarray
    shift_c: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    zeros_a: np.ndarray
    zeros_b: np.ndarray
    delta_c: np.ndarray
    delta_x: np.ndarray


def track(traj, bump: Optional[BumpProfile], L: float) -> ShiftSeries:
    """Shift and zero time series over a trajectory, with running excursions."""
    g = traj.grid
    times, cs, als, bes, zas, zbs = [], [], [], [], [], []
    ref_zeros = None
    for t, fld in traj.snapshot_fields():
        times.append(t)
        if bump is not None:
            pr = project_bump(fld, bump)
            cs.append(pr.shift)
        else:
            cs.append(float("nan"))
        try:
            pg = project_glued(fld, L)
            als.append(pg.glued.alpha)
            bes.append(pg.glued.beta)
        except Exception:
            als.append(float("nan"))
            bes.append(float("nan"))
        zs = zero_crossings(g, fld.values)
        if ref_zeros is None and zs.size >= 2:
            ref_zeros = zs[:2]
        if zs.size >= 2 and ref_zeros is not None:
            # the two zeros nearest the reference zeros
            za = zs[np.argmin(g.circle_dist(zs, ref_zeros[0]))]
            zb = zs[np.argmin(g.circle_dist(zs, ref_zeros[1]))]
            zas.append(float(za))
            zbs.append(float(zb))
        else:
            zas.append(float("nan"))
            zbs.append(float("nan"))

    times = np.asarray(times)
    cs = np.asarray(cs)
    zas, zbs = np.asarray(zas), np.asarray(zbs)
    dc = np.maximum.accumulate(np.where(np.isnan(cs), 0.0, g.circle_dist(cs, cs[0])))
    dxa = np.where(np.isnan(zas), 0.0, g.circle_dist(zas, zas[0]))
    dxb = np.where(np.isnan(zbs), 0.0, g.circle_dist(zbs, zbs[0]))
    dx = np.maximum.accumulate(np.maximum(dxa, dxb))
    return ShiftSeries(times=times, shift_c=cs, alpha=np.asarray(als),
                       beta=np.asarray(bes), zeros_a=zas, zeros_b=zbs,
                       delta_c=dc, delta_x=dx)
