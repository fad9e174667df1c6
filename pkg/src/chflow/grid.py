"""Uniform periodic grid, real fields, and spectral helpers.

The domain is [-L, L) with period 2L and n equispaced points.  Wavenumbers
are k_j = pi*j/L.  All derivatives and interpolation are spectral; integrals
use the periodic trapezoid rule (dx * sum), which is spectrally accurate for
smooth periodic integrands.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Periodic grid on [-L, L) with n points (n a power of two)."""

    sidelength: float
    n: int

    def __post_init__(self):
        if self.sidelength <= 0:
            raise ValueError("sidelength must be positive")
        if self.n < 4 or (self.n & (self.n - 1)) != 0:
            raise ValueError("n must be a power of two >= 4")

    @property
    def period(self) -> float:
        return 2.0 * self.sidelength

    @property
    def dx(self) -> float:
        return self.period / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.sidelength + self.dx * np.arange(self.n)

    @property
    def k(self) -> np.ndarray:
        """Real-FFT wavenumbers, length n//2 + 1."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.dx)

    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask for the rfft modes."""
        kmax = np.pi / self.dx
        return self.k <= (2.0 / 3.0) * kmax

    def wrap(self, x):
        """Map positions into [-L, L)."""
        return (np.asarray(x) + self.sidelength) % self.period - self.sidelength

    def circle_dist(self, a, b):
        """Distance on the torus between positions a and b."""
        d = np.abs(self.wrap(np.asarray(a) - np.asarray(b)))
        return np.minimum(d, self.period - d)


@dataclass
class Field:
    """Real-valued samples of a function on a Grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValueError("values must have shape (grid.n,)")

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    def mean(self) -> float:
        return float(np.mean(self.values))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


def deriv(grid: Grid, values: np.ndarray, order: int = 1) -> np.ndarray:
    """Spectral derivative of the given order."""
    vhat = np.fft.rfft(values)
    return np.fft.irfft((1j * grid.k) ** order * vhat, n=grid.n)


def integrate(grid: Grid, values: np.ndarray) -> float:
    """Periodic trapezoid quadrature over the full torus."""
    return float(grid.dx * np.sum(values))


def integrate_half(grid: Grid, values: np.ndarray, side: str) -> float:
    """Trapezoid quadrature over the half-domain [-L, 0] or [0, L].

    Endpoint values get weight 1/2; x = -L is identified with x = L when
    integrating the right half.
    """
    x = grid.x
    n = grid.n
    if side == "minus":
        idx = np.arange(0, n // 2 + 1)
    elif side == "plus":
        idx = np.concatenate([np.arange(n // 2, n), [0]])
    else:
        raise ValueError("side must be 'minus' or 'plus'")
    w = np.ones(idx.size)
    w[0] = w[-1] = 0.5
    return float(grid.dx * np.sum(w * values[idx]))


def translate(grid: Grid, values: np.ndarray, shift: float) -> np.ndarray:
    """Translate samples by `shift` via a Fourier phase factor: f(x - shift)."""
    vhat = np.fft.rfft(values)
    return np.fft.irfft(vhat * np.exp(-1j * grid.k * shift), n=grid.n)


def interpolate(grid: Grid, values: np.ndarray, pts) -> np.ndarray:
    """Evaluate the band-limited interpolant of grid samples at arbitrary points.

    The Nyquist mode is treated as a pure cosine, which is the unique real
    interpolant convention.
    """
    pts = np.atleast_1d(np.asarray(pts, dtype=float))
    vhat = np.fft.rfft(values) / grid.n
    k = grid.k
    # rfft stores half the spectrum; double all modes except DC and Nyquist
    scale = np.full(k.size, 2.0)
    scale[0] = 1.0
    if grid.n % 2 == 0:
        scale[-1] = 1.0
    # sample j sits at x_j = -L + j dx, so the DFT phases reference x + L
    phase = np.exp(1j * np.outer(pts + grid.sidelength, k))
    out = phase @ (scale * vhat)
    return out.real


def zero_crossings(grid: Grid, values: np.ndarray, refine_tol: float = 1e-10) -> np.ndarray:
    """Positions of sign changes of the band-limited interpolant, in [-L, L).

    Each grid-sample sign change is refined by bisection on the spectral
    interpolant until the bracket is narrower than `refine_tol`.
    """
    v = values
    n = grid.n
    sgn = np.sign(v)
    # treat exact zeros as members of the preceding sign block
    for j in range(n):
        if sgn[j] == 0:
            sgn[j] = sgn[j - 1] if sgn[j - 1] != 0 else 1.0
    flips = np.nonzero(sgn != np.roll(sgn, -1))[0]
    if flips.size == 0:
        return np.empty(0)
    lo = grid.x[flips]
    hi = lo + grid.dx
    flo = interpolate(grid, v, lo)
    for _ in range(64):
        if np.max(hi - lo) < refine_tol:
            break
        mid = 0.5 * (lo + hi)
        fmid = interpolate(grid, v, mid)
        left = flo * fmid <= 0
        hi = np.where(left, mid, hi)
        flo = np.where(left, flo, fmid)
        lo = np.where(left, lo, mid)
    return np.sort(grid.wrap(0.5 * (lo + hi)))


@dataclass
class SpectralCache:
    """Per-grid FFT workspace reused across solver steps."""

    grid: Grid
    k2: np.ndarray = field(init=False)
    k4: np.ndarray = field(init=False)
    mask: np.ndarray = field(init=False)

    def __post_init__(self):
        k = self.grid.k
        self.k2 = k * k
        self.k4 = self.k2 * self.k2
        self.mask = self.grid.dealias_mask()
