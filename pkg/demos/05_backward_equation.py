"""Decay of the backward comparison equation for square-wave terminal data.

zeta solves zeta_t + g2 zeta_xx - zeta_xxxx = 0 backward from time T; in
tau = T - t the solution is an exact Fourier multiplier.  The curvature of
zeta crosses over from biharmonic (tau^-1/2) to diffusive (tau^-1) decay.
Runs in a couple of seconds.
"""

import numpy as np

from chflow.experiments import fit_rate
from chflow.grid import Field, Grid
from chflow.potential import quartic
from chflow.solver import BackwardConfig, solve_backward

p = quartic()
g = Grid(1024.0, 65536)
psi = Field(g, np.sign(np.sin(2.0 * np.pi * g.x / 256.0)))
cfg = BackwardConfig(g2=p.gpp_minus, horizon=100.0, psi=psi)
out = solve_backward(cfg, g, taus=np.geomspace(1e-4, 100.0, 121))

print("   tau        sup |zeta_xx|")
for j in range(0, 121, 12):
    print(f"  {out.taus[j]:9.2e}  {out.zeta_xx_sup[j]:.4e}")

for lo, hi, label in ((1e-4, 1e-2, "small tau (biharmonic)"),
                      (1.0, 100.0, "large tau (diffusive) ")):
    m = (out.taus >= lo) & (out.taus <= hi)
    res = fit_rate(out.taus[m], out.zeta_xx_sup[m], model="PowerLaw")
    print(f"{label}: log-log slope {res.rate:+.3f}  (R^2 {res.r2:.5f})")
