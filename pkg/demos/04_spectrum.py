"""Low-lying spectrum of the linearization around a bump.

The operator -d_xx + G''(w) has an exact translation zero mode, an
exponentially small interface-interaction mode, and a gapped remainder.
Runs in a few seconds.
"""

from chflow.grid import Grid
from chflow.inequalities import check_linearization_spectrum
from chflow.potential import quartic
from chflow.profiles import solve_bump

p = quartic()
prev = None
for L, n in ((16.0, 256), (24.0, 512), (32.0, 512)):
    w = solve_bump(Grid(L, n), p, 0.0)
    rep = check_linearization_spectrum(w, p)
    print(f"L = {L:g}:")
    print(f"  lambda1 (translation) = {rep.lambda1:+.3e}  "
          f"(w_x overlap {rep.overlap1:.6f})")
    print(f"  lambda2 (interaction) = {rep.lambda2:+.3e}")
    print(f"  lambda3 (gapped)      = {rep.lambda3:+.4f}")
    if prev is not None:
        print(f"  interaction shrinks by x{abs(rep.lambda2) / abs(prev):.2e} "
              f"vs the previous L")
    prev = rep.lambda2
