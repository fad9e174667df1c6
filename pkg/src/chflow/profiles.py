"""Slow-manifold profiles: kinks, constrained bumps, and glued kink pairs.

The kink is the increasing heteroclinic connecting -1 to +1.  For the quartic
well it is tanh(x / sqrt(2)); for custom wells it is obtained from the
first-order reduction v' = sqrt(2 G(v)) with asymptotic tail continuation.
Bumps are torus minimizers with a fixed mean, computed by Newton iteration on
the collocated Euler-Lagrange system with a Lagrange multiplier.  Glued kink
profiles join a shifted increasing and decreasing kink with a degree-7
two-point Hermite interpolant, which matches derivatives of orders 0..3 and
is therefore exactly C^3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import integrate as sp_integrate
from scipy import linalg as sp_linalg
from scipy.interpolate import BPoly, CubicSpline

from .errors import (
    InterpolantBoundViolated,
    NewtonDiverged,
    ProfileSolveFailed,
    SeparationViolated,
    WrongBranch,
)
from .grid import Field, Grid, deriv, integrate, interpolate, zero_crossings
from .potential import PotentialKind, PotentialSpec

SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# kinks


@dataclass
class KinkProfile:
    """Increasing kink v with v(shift) = 0."""

    shift: float
    potential: PotentialSpec
    _table: object = dc_field(default=None, repr=False)
    _x_tail: float = dc_field(default=0.0, repr=False)
    _v_tail: float = dc_field(default=0.0, repr=False)

    def value(self, x):
        z = np.asarray(x, dtype=float) - self.shift
        if self.potential.kind is PotentialKind.QUARTIC:
            return np.tanh(z / SQRT2)
        return self._custom_value(z)

    def d1(self, x):
        v = self.value(x)
        return np.sqrt(np.maximum(2.0 * self.potential.value(v), 0.0))

    def d2(self, x):
        return self.potential.d1(self.value(x))

    def d3(self, x):
        return self.potential.d2(self.value(x)) * self.d1(x)

    def _custom_value(self, z):
        z = np.atleast_1d(z)
        out = np.empty_like(z)
        az = np.abs(z)
        core = az <= self._x_tail
        out[core] = self._table(az[core])
        rate = math.sqrt(self.potential.gpp_plus)
        tail = ~core
        out[tail] = 1.0 - (1.0 - self._v_tail) * np.exp(-rate * (az[tail] - self._x_tail))
        return np.where(z >= 0, out, -out)


def kink(p: PotentialSpec, a: float = 0.0) -> KinkProfile:
    """Construct the shifted kink v(. - a)."""
    prof = KinkProfile(shift=float(a), potential=p)
    if p.kind is PotentialKind.QUARTIC:
        return prof

    # integrate v' = sqrt(2 G(v)) outward from v(0) = 0
    def rhs(_x, v):
        return np.sqrt(np.maximum(2.0 * p.value(v), 0.0))

    def near_one(_x, v):
        return v[0] - (1.0 - 1e-8)

    near_one.terminal = True
    sol = sp_integrate.solve_ivp(
        rhs, (0.0, 200.0), [0.0], events=near_one, rtol=1e-12, atol=1e-14,
        dense_output=True, max_step=0.1,
    )
    if sol.t_events[0].size == 0:
        raise ProfileSolveFailed("kink ODE never reached the far field")
    xs = np.linspace(0.0, sol.t_events[0][0], 4096)
    vs = sol.sol(xs)[0]
    if np.any(np.diff(vs) <= 0):
        raise ProfileSolveFailed("kink ODE lost monotonicity")
    prof._table = CubicSpline(xs, vs)
    prof._x_tail = float(xs[-1])
    prof._v_tail = float(vs[-1])
    return prof


def kink_energy(p: PotentialSpec) -> float:
    """Energy of the kink on the line, via the equipartition identity.

    E(v) = int 2 G(v) dx = int_{-1}^{1} sqrt(2 G(s)) ds.
    """
    val, _err = sp_integrate.quad(
        lambda s: math.sqrt(max(2.0 * float(p.value(np.float64(s))), 0.0)),
        -1.0, 1.0, epsabs=1e-12, epsrel=1e-10, limit=200,
    )
    return float(val)


# ---------------------------------------------------------------------------
# bumps


@dataclass
class BumpProfile:
    """Constrained minimizer on the torus: two interfaces, fixed mean."""

    grid: Grid
    samples: Field
    shift: float
    lam: float
    m: float
    zeros: tuple
    energy: float
    energy_gap_two_kinks: float

    def translated(self, c: float) -> np.ndarray:
        from .grid import translate

        return translate(self.grid, self.samples.values, c)


def _second_derivative_matrix(grid: Grid) -> np.ndarray:
    """Dense Fourier-collocation second-derivative matrix."""
    n = grid.n
    eye = np.eye(n)
    return np.fft.irfft(-(grid.k ** 2)[:, None] * np.fft.rfft(eye, axis=0), axis=0, n=n)


def _even_project(w: np.ndarray) -> np.ndarray:
    """Project onto fields even about x = 0 (grid index 0 is x = -L)."""
    n = w.size
    idx = (-np.arange(n)) % n
    return 0.5 * (w + w[idx])


def _bump_newton(grid: Grid, p: PotentialSpec, m: float, tol: float = 5e-13):
    x = grid.x
    L = grid.sidelength
    ell0 = L * (1.0 + m)
    w = np.tanh((x + 0.5 * ell0) / SQRT2) + np.tanh((0.5 * ell0 - x) / SQRT2) - 1.0
    w = _even_project(w)
    lam = 0.0
    d2mat = _second_derivative_matrix(grid)
    n = grid.n

    def residual(wv, lv):
        r1 = -deriv(grid, wv, 2) + p.d1(wv) - lv
        r2 = float(np.mean(wv)) - m
        return r1, r2, max(float(np.max(np.abs(r1))), abs(r2))

    r1, r2, res = residual(w, lam)
    for _ in range(50):
        if res < tol:
            return w, lam
        jac = np.empty((n + 1, n + 1))
        jac[:n, :n] = -d2mat
        jac[:n, :n][np.diag_indices(n)] += p.d2(w)
        jac[:n, n] = -1.0
        jac[n, :n] = 1.0 / n
        jac[n, n] = 0.0
        rhs = np.concatenate([r1, [r2]])
        delta = sp_linalg.solve(jac, rhs)
        damp = 1.0
        while damp >= 1e-4:
            w_new = _even_project(w - damp * delta[:n])
            lam_new = lam - damp * delta[n]
            r1n, r2n, resn = residual(w_new, lam_new)
            if resn < res or resn < tol:
                w, lam, r1, r2, res = w_new, lam_new, r1n, r2n, resn
                break
            damp *= 0.5
        else:
            raise NewtonDiverged(f"bump Newton stalled at residual {res:.3e}")
    if res >= tol:
        raise NewtonDiverged(f"bump Newton did not reach tolerance ({res:.3e})")
    return w, lam


def solve_bump(grid: Grid, p: PotentialSpec, m: float, l_min: float = 16.0) -> BumpProfile:
    """Solve the constrained Euler-Lagrange equation -w_xx + G'(w) = lambda.

    The iteration runs on a coarse grid with 8 points per unit length (dense
    Jacobian) and the solution is spectrally upsampled; since the profile is
    band-limited far below the coarse Nyquist frequency, the upsampled field
    satisfies the fine-grid collocation system to within roundoff.
    """
    from .functionals import energy as energy_fn

    if not (-0.75 <= m <= 0.75):
        raise ValueError("mean must lie in [-3/4, 3/4]")
    if grid.sidelength < l_min:
        raise ValueError(f"sidelength below configured minimum {l_min}")
    if grid.n < 8 * grid.period:
        raise ValueError("need at least 8 points per unit length")

    n_coarse = 1 << int(math.ceil(math.log2(8 * grid.period)))
    if n_coarse >= grid.n:
        w, lam = _bump_newton(grid, p, m)
        wv = w
    else:
        coarse = Grid(grid.sidelength, n_coarse)
        wc, lam = _bump_newton(coarse, p, m)
        spec = np.fft.rfft(wc)
        pad = np.zeros(grid.n // 2 + 1, dtype=complex)
        pad[: spec.size] = spec
        wv = np.fft.irfft(pad * (grid.n / coarse.n), n=grid.n)
        wv = _even_project(wv)
        res = np.max(np.abs(-deriv(grid, wv, 2) + p.d1(wv) - lam))
        if res > 1e-9:
            wv, lam = _bump_newton(grid, p, m)

    zs = zero_crossings(grid, wv)
    if zs.size != 2:
        raise WrongBranch(f"converged profile has {zs.size} zeros, expected 2")
    sep = float(zs[1] - zs[0])
    L = grid.sidelength
    if not (L / 16.0 <= sep <= 2.0 * L - L / 16.0):
        raise WrongBranch(f"interface separation {sep:.3f} outside admissible range")

    fld = Field(grid, wv)
    e_w = energy_fn(fld, p)
    gap = abs(e_w - 2.0 * kink_energy(p))
    return BumpProfile(
        grid=grid, samples=fld, shift=0.0, lam=float(lam), m=float(m),
        zeros=(float(zs[0]), float(zs[1])), energy=float(e_w),
        energy_gap_two_kinks=float(gap),
    )


# ---------------------------------------------------------------------------
# glued kink profiles


@dataclass
class GluedKinkProfile:
    """C^3 profile equal to v(. - alpha) left of q and -v(. - beta) right of q."""

    q: float
    alpha: float
    beta: float
    L: float
    on_torus: bool
    potential: PotentialSpec
    h1_gluing_norm: float
    decay_constant: float
    _kink: KinkProfile = dc_field(default=None, repr=False)
    _poly_q: BPoly = dc_field(default=None, repr=False)
    _poly_far: BPoly = dc_field(default=None, repr=False)

    def value(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        v = self._kink
        if not self.on_torus:
            out = np.empty_like(x)
            left = x <= self.q - 1.0
            right = x >= self.q + 1.0
            mid = ~(left | right)
            out[left] = v.value(x[left] - self.alpha)
            out[right] = -v.value(x[right] - self.beta)
            out[mid] = self._poly_q(x[mid] - self.q)
            return out
        P = 2.0 * self.L
        xi = (x - self.q + self.L) % P - self.L  # offset from q in [-L, L)
        aoff = (self.alpha - self.q + self.L) % P - self.L
        boff = (self.beta - self.q + self.L) % P - self.L
        out = np.empty_like(xi)
        near_q = np.abs(xi) < 1.0
        near_far = np.abs(xi) >= self.L - 1.0
        left = (xi <= -1.0) & ~near_far
        right = (xi >= 1.0) & ~near_far
        out[left] = v.value(xi[left] - aoff)
        out[right] = -v.value(xi[right] - boff)
        out[near_q] = self._poly_q(xi[near_q])
        # offset from the second gluing point q + L, mapped into (-1, 1)
        s = np.where(xi[near_far] > 0, xi[near_far] - self.L, xi[near_far] + self.L)
        out[near_far] = self._poly_far(s)
        return out

    def sample(self, grid: Grid) -> Field:
        return Field(grid, self.value(grid.x))


def _hermite_block(values_fn, shift, pt, sign=1.0):
    v, d1, d2, d3 = values_fn
    z = pt - shift
    return [sign * v(z), sign * d1(z), sign * d2(z), sign * d3(z)]


def glue_kinks(
    p: PotentialSpec,
    q: float,
    alpha: float,
    beta: float,
    L: float,
    on_torus: bool = True,
) -> GluedKinkProfile:
    """Build a glued kink profile and verify its interpolation-region bounds."""
    v = kink(p, 0.0)

    def fns():
        return (v.value, v.d1, v.d2, v.d3)

    if on_torus:
        P = 2.0 * L
        aoff = (alpha - q + L) % P - L
        boff = (beta - q + L) % P - L
        sep = min(abs(aoff), P - abs(aoff), abs(boff), P - abs(boff))
        if sep < L / 16.0 or not (aoff <= 0.0 <= boff):
            raise SeparationViolated(
                f"gluing separations (|{aoff:.2f}|, |{boff:.2f}|) below L/16 or misordered")
        left_dat = _hermite_block(fns(), aoff, -1.0)
        right_dat = _hermite_block(fns(), boff, 1.0, sign=-1.0)
        poly_q = BPoly.from_derivatives([-1.0, 1.0], [left_dat, right_dat])
        far_left = _hermite_block(fns(), boff, L - 1.0, sign=-1.0)
        far_right = _hermite_block(fns(), aoff, -L + 1.0)
        poly_far = BPoly.from_derivatives([-1.0, 1.0], [far_left, far_right])
    else:
        # small slack: mass-constrained constructions sit at the class edge
        if q - alpha < L / 2.0 - 1e-4 or beta - q < L / 2.0 - 1e-4:
            raise SeparationViolated("line profile needs q - alpha, beta - q >= L/2")
        left_dat = _hermite_block(fns(), alpha - q, -1.0)
        right_dat = _hermite_block(fns(), beta - q, 1.0, sign=-1.0)
        poly_q = BPoly.from_derivatives([-1.0, 1.0], [left_dat, right_dat])
        poly_far = None

    # measure ||w~ - 1||_{H^1} on the gluing interval (q-1, q+1)
    s = np.linspace(-1.0, 1.0, 2049)
    vals = poly_q(s) - 1.0
    dvals = poly_q.derivative()(s)
    h1 = math.sqrt(np.trapezoid(vals * vals + dvals * dvals, s))
    bound = math.exp(-L / 64.0)
    if h1 > bound:
        raise InterpolantBoundViolated(
            f"||w~ - 1||_H1 = {h1:.3e} exceeds exp(-L/64) = {bound:.3e}")
    c0 = L / max(-math.log(max(h1, 1e-300)), 1e-12)

    return GluedKinkProfile(
        q=float(q), alpha=float(alpha), beta=float(beta), L=float(L),
        on_torus=on_torus, potential=p, h1_gluing_norm=float(h1),
        decay_constant=float(c0), _kink=v, _poly_q=poly_q, _poly_far=poly_far,
    )


# ---------------------------------------------------------------------------
# sharp interface


@dataclass(frozen=True)
class SharpInterface:
    """Indicator-type profile: +1 on [-L/2, L/2] + shift, -1 elsewhere."""

    half_width: float
    shift: float = 0.0

    def value(self, x):
        z = np.asarray(x, dtype=float) - self.shift
        return np.where(np.abs(z) <= self.half_width, 1.0, -1.0)
