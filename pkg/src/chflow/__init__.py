"""Deterministic 1-d Cahn-Hilliard relaxation lab.

Pseudo-spectral simulation of u_t = -(u_xx - G'(u))_xx on a periodic
domain, together with the slow-manifold profiles (kinks, bumps, glued
kinks), projection and tracking utilities, and numerical checks of the
energy-dissipation inequalities that govern coarsening.
"""

__version__ = "0.1.0"

from .grid import Field, Grid
from .potential import PotentialSpec, custom, quartic
from .profiles import (BumpProfile, GluedKinkProfile, KinkProfile,
                       glue_kinks, kink, kink_energy, solve_bump)
from .solver import BackwardConfig, SolverConfig, evolve, solve_backward, step
from .functionals import (dissipation, energy, excess_mass, hminus1_norm,
                          discrepancy_sup)

__all__ = [
    "Field", "Grid", "PotentialSpec", "custom", "quartic",
    "BumpProfile", "GluedKinkProfile", "KinkProfile",
    "glue_kinks", "kink", "kink_energy", "solve_bump",
    "BackwardConfig", "SolverConfig", "evolve", "solve_backward", "step",
    "dissipation", "energy", "excess_mass", "hminus1_norm",
    "discrepancy_sup", "__version__",
]
