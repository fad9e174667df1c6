"""Double-well potentials with derivatives up to third order.

A valid potential is even, vanishes exactly at +-1, is positive elsewhere,
is non-increasing on [0, 1], and has positive curvature at the wells.
Custom potentials supply closures for the value and the first three
derivatives; no symbolic or automatic differentiation is involved.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .errors import PotentialInvalid


class PotentialKind(enum.Enum):
    QUARTIC = "quartic"
    CUSTOM = "custom"


@dataclass(frozen=True)
class PotentialSpec:
    """A double-well potential G together with G', G'', G'''."""

    kind: PotentialKind
    value: Callable[[np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray], np.ndarray]
    d3: Callable[[np.ndarray], np.ndarray]
    gpp_plus: float = dc_field(init=False)
    gpp_minus: float = dc_field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "gpp_plus", float(self.d2(np.float64(1.0))))
        object.__setattr__(self, "gpp_minus", float(self.d2(np.float64(-1.0))))


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the structural checks on a potential."""

    checks: dict
    passed: bool


# module-level so that PotentialSpec instances pickle cleanly
def _quartic_value(u):
    return 0.25 * (1.0 - u * u) ** 2


def _quartic_d1(u):
    return u * u * u - u


def _quartic_d2(u):
    return 3.0 * u * u - 1.0


def _quartic_d3(u):
    return 6.0 * u


def quartic() -> PotentialSpec:
    """The canonical well G(u) = (1 - u^2)^2 / 4."""
    return PotentialSpec(
        kind=PotentialKind.QUARTIC,
        value=_quartic_value,
        d1=_quartic_d1,
        d2=_quartic_d2,
        d3=_quartic_d3,
    )


def custom(value, d1, d2, d3, samples: int = 1000) -> PotentialSpec:
    """Build and validate a user-supplied potential."""
    p = PotentialSpec(PotentialKind.CUSTOM, value, d1, d2, d3)
    validate(p, samples)
    return p


def validate(p: PotentialSpec, samples: int) -> ValidationReport:
    """Check the double-well requirements on a uniform sample of [-2, 2].

    Raises PotentialInvalid if any check fails beyond tolerance 1e-12.
    """
    if samples < 16:
        raise ValueError("samples must be >= 16")
    tol = 1e-12
    u = np.linspace(-2.0, 2.0, samples)
    g = p.value(u)

    checks = {}
    checks["zeros_at_pm1"] = max(abs(float(p.value(np.float64(1.0)))),
                                 abs(float(p.value(np.float64(-1.0)))))
    off_wells = np.minimum(np.abs(u - 1.0), np.abs(u + 1.0)) > 1e-3
    # positivity away from the wells; zero is approached quadratically, so
    # require G > c * dist^2 with a tiny c to stay tolerance-friendly
    checks["positive_off_wells"] = float(max(0.0, np.max(-g[off_wells])))
    checks["even"] = float(np.max(np.abs(g - p.value(-u))))
    u01 = np.linspace(0.0, 1.0, samples)
    checks["nonincreasing_on_01"] = float(max(0.0, np.max(p.d1(u01))))
    checks["curvature_at_wells"] = float(max(0.0, tol - min(p.gpp_plus, p.gpp_minus)))

    worst = max(checks.values())
    passed = worst <= tol
    report = ValidationReport(checks=checks, passed=passed)
    if not passed:
        failed = [k for k, v in checks.items() if v > tol]
        raise PotentialInvalid(f"potential checks failed: {failed} (report: {checks})")
    return report
