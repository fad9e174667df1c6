"""Time integration for u_t = -(u_xx - G'(u))_xx on the periodic grid.

The scheme is a first-order stabilized semi-implicit step in Fourier space:
the biharmonic term and a stabilization S*k^2 shift are implicit, the
nonlinearity is explicit,

    u+_k = [u_k - dt k^2 (FFT(G'(u))_k - S u_k)] / [1 + dt (k^4 + S k^2)].

The zero mode is untouched, so the mean is conserved exactly.  Accuracy is
controlled by step doubling: a step is accepted when the full-step and
half-half-step results agree in the sup norm and the energy does not
increase beyond roundoff.

The module also provides the exact solve of the constant-coefficient
backward comparison equation zeta_t + g2 zeta_xx - zeta_xxxx = 0, which after
the substitution tau = T - t becomes a pure Fourier multiplier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import EnergyIncreaseAtFloor, NonFinite, StepFloorReached
from .functionals import energy
from .grid import Field, Grid
from .potential import PotentialSpec

ENERGY_SLACK = 1e-12  # per-step roundoff allowance for monotonicity


def default_stabilization(p: PotentialSpec, umax: float = 1.2) -> float:
    u = np.linspace(-umax, umax, 481)
    return float(np.max(p.d2(u)))


@dataclass
class SolverConfig:
    dt: float = 1e-3
    stabilization: Optional[float] = None  # default: max G'' over |u| <= 1.2
    t_end: float = 1.0
    adapt: bool = True
    dealias: bool = True
    snapshot_times: Optional[Sequence[float]] = None
    step_tol: float = 1e-7
    dt_floor: float = 1e-9
    dt_cap: float = 0.5

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")


@dataclass
class BackwardConfig:
    g2: float
    horizon: float
    psi: Field

    def __post_init__(self):
        if self.g2 <= 0:
            raise ValueError("curvature coefficient must be positive")
        if np.max(np.abs(self.psi.values)) > 1.0 + 1e-12:
            raise ValueError("terminal data must satisfy |psi| <= 1")


@dataclass
class Trajectory:
    grid: Grid
    times: list = dc_field(default_factory=list)
    snapshots: list = dc_field(default_factory=list)  # Field per snapshot time
    accepted_steps: int = 0
    rejected_steps: int = 0
    max_energy_increase: float = 0.0
    mean_drift: float = 0.0

    def snapshot_fields(self):
        return list(zip(self.times, self.snapshots))


def _step_spectral(uhat, u, dt, k2, k4, mask, S, p, dealias):
    ghat = np.fft.rfft(p.d1(u))
    if dealias:
        ghat = np.where(mask, ghat, 0.0)
    return (uhat - dt * k2 * (ghat - S * uhat)) / (1.0 + dt * (k4 + S * k2))


def step(u: Field, cfg: SolverConfig, p: PotentialSpec) -> Field:
    """One stabilized semi-implicit step of size cfg.dt."""
    if not u.is_finite():
        raise NonFinite("input field is not finite")
    g = u.grid
    k = g.k
    k2, k4 = k * k, k ** 4
    S = cfg.stabilization if cfg.stabilization is not None else default_stabilization(p)
    uhat = np.fft.rfft(u.values)
    out_hat = _step_spectral(uhat, u.values, cfg.dt, k2, k4, g.dealias_mask(), S, p, cfg.dealias)
    out = np.fft.irfft(out_hat, n=g.n)
    if not np.all(np.isfinite(out)):
        raise NonFinite("solver step produced non-finite values")
    return Field(g, out)


def evolve(
    u0: Field,
    cfg: SolverConfig,
    p: PotentialSpec,
    hooks: Optional[Callable[[float, Field], None]] = None,
) -> Trajectory:
    """Advance u0 to cfg.t_end, invoking `hooks(t, field)` at snapshot times.

    With cfg.adapt, step doubling drives the step size: the accepted state is
    the half-half result, the step halves whenever the comparison error
    exceeds cfg.step_tol or the energy increases, and grows gently when the
    error is comfortably small.
    """
    g = u0.grid
    k = g.k
    k2, k4 = k * k, k ** 4
    mask = g.dealias_mask()
    S = cfg.stabilization if cfg.stabilization is not None else default_stabilization(p)

    snap_times = sorted(set(cfg.snapshot_times or []))
    snap_times = [t for t in snap_times if 0.0 < t <= cfg.t_end + 1e-12]

    traj = Trajectory(grid=g)
    u = u0.values.copy()
    uhat = np.fft.rfft(u)
    t = 0.0
    dt = min(cfg.dt, cfg.dt_cap)
    e_prev = energy(Field(g, u), p)
    mean0 = float(np.mean(u))

    def record(time, values):
        fld = Field(g, values.copy())
        traj.times.append(time)
        traj.snapshots.append(fld)
        if hooks is not None:
            hooks(time, fld)

    record(0.0, u)
    next_snap = 0

    while t < cfg.t_end - 1e-14:
        target = cfg.t_end
        if next_snap < len(snap_times):
            target = min(target, snap_times[next_snap])
        dt_eff = min(dt, target - t)

        if not cfg.adapt:
            uhat = _step_spectral(uhat, u, dt_eff, k2, k4, mask, S, p, cfg.dealias)
            u = np.fft.irfft(uhat, n=g.n)
            t += dt_eff
            traj.accepted_steps += 1
        else:
            accepted = False
            while not accepted:
                dt_eff = min(dt, target - t)
                full = _step_spectral(uhat, u, dt_eff, k2, k4, mask, S, p, cfg.dealias)
                h1 = _step_spectral(uhat, u, 0.5 * dt_eff, k2, k4, mask, S, p, cfg.dealias)
                u_h1 = np.fft.irfft(h1, n=g.n)
                h2 = _step_spectral(h1, u_h1, 0.5 * dt_eff, k2, k4, mask, S, p, cfg.dealias)
                u_full = np.fft.irfft(full, n=g.n)
                u_half = np.fft.irfft(h2, n=g.n)
                err = float(np.max(np.abs(u_full - u_half)))
                if not math.isfinite(err):
                    raise NonFinite(f"non-finite state at t = {t:.6g}")
                e_new = energy(Field(g, u_half), p)
                ok = err <= cfg.step_tol and e_new <= e_prev + ENERGY_SLACK
                if ok:
                    uhat, u = h2, u_half
                    t += dt_eff
                    traj.accepted_steps += 1
                    traj.max_energy_increase = max(traj.max_energy_increase, e_new - e_prev)
                    e_prev = e_new
                    # grow only on full (unclipped) steps to avoid thrash
                    if err < 0.25 * cfg.step_tol and dt_eff >= dt * (1 - 1e-12):
                        dt = min(2.0 * dt, cfg.dt_cap)
                    accepted = True
                else:
                    traj.rejected_steps += 1
                    if dt <= cfg.dt_floor * (1 + 1e-9):
                        if e_new > e_prev + ENERGY_SLACK:
                            raise EnergyIncreaseAtFloor(
                                f"energy increased by {e_new - e_prev:.3e} at dt floor")
                        raise StepFloorReached(f"dt floor reached at t = {t:.6g}")
                    dt = max(0.5 * dt, cfg.dt_floor)

        if next_snap < len(snap_times) and t >= snap_times[next_snap] - 1e-12:
            record(snap_times[next_snap], u)
            next_snap += 1

    if not snap_times or abs(traj.times[-1] - cfg.t_end) > 1e-12:
        record(cfg.t_end if t >= cfg.t_end - 1e-12 else t, u)
    traj.mean_drift = abs(float(np.mean(u)) - mean0)
    return traj


def log_snapshot_times(t_min: float, t_end: float, per_decade: int = 16) -> list:
    """Log-spaced snapshot schedule, per_decade samples per decade."""
    if t_min <= 0 or t_end <= t_min:
        raise ValueError("need 0 < t_min < t_end")
    ndec = math.log10(t_end / t_min)
    npts = max(2, int(round(ndec * per_decade)) + 1)
    return list(np.geomspace(t_min, t_end, npts))


@dataclass
class BackwardTrajectory:
    grid: Grid
    taus: np.ndarray
    zeta_xx_sup: np.ndarray
    zeta_final: Field


def solve_backward(cfg: BackwardConfig, grid: Grid, taus: Optional[Sequence[float]] = None) -> BackwardTrajectory:
    """Solve the backward comparison equation exactly in time.

    With tau = T - t, the problem becomes zeta_tau = -zeta_xxxx + g2 zeta_xx,
    solved by the multiplier exp(-tau (k^4 + g2 k^2)) applied to psi.
    """
    if taus is None:
        taus = np.geomspace(1e-6, cfg.horizon, 200)
    taus = np.asarray(sorted(taus))
    k = grid.k
    decay = k ** 4 + cfg.g2 * k * k
    psihat = np.fft.rfft(cfg.psi.values)
    sup = np.empty(taus.size)
    zeta = cfg.psi
    for i, tau in enumerate(taus):
        zhat = psihat * np.exp(-tau * decay)
        zxx = np.fft.irfft(-(k * k) * zhat, n=grid.n)
        sup[i] = float(np.max(np.abs(zxx)))
        if i == taus.size - 1:
            zeta = Field(grid, np.fft.irfft(zhat, n=grid.n))
    return BackwardTrajectory(grid=grid, taus=taus, zeta_xx_sup=sup, zeta_final=zeta)
