"""Functional-inequality constants measured along a relaxing trajectory.

Runs a small torus scenario and evaluates the interpolation (Nash-type)
estimate, the dissipation-by-energy bound, and the two-sided comparison of
the energy gap with the squared H^1 distance.  About half a minute.
"""

from chflow.experiments import Scenario, run
from chflow.inequalities import (check_dissipation_bounds, check_eed,
                                 check_nash, check_ode_decay)
from chflow.potential import quartic
from chflow.profiles import solve_bump

p = quartic()
s = Scenario(id="demo-ineq", problem="TorusBump", L=32.0, n=1024, m=-0.5,
             dist_shape="dip", dist_mass=1.5, dist_width=4.0,
             dist_offset=16.0, w0_target=1.5, t_end=1500.0,
             snapshots_per_decade=24)
traj, series, init = run(s)

rep = check_nash(series)
print(f"gap <= C D^(1/3) (V+1)^(4/3):   C = {rep.worst:.4f}  "
      f"(cap {rep.cap:g}, {rep.excluded} snapshots excluded)")

rep = check_dissipation_bounds(series)
print(f"D(t) <= C max(gap(t/2)^2, gap(t/2)/t):   C = {rep.worst:.4f}  "
      f"(cap {rep.cap:g})")
gw = rep.metadata["growth_worst"]
if gw == gw:  # D reaches machine zero late in short runs
    print(f"  dD/dt vs D^(3/2) on increasing windows: {gw:.4f}")
print(f"  integral of D^(3/4) vs V_T:             "
      f"{rep.metadata['integral_ratio']:.4f}")

rep = check_ode_decay(series)
print(f"algebraic decay: slope {rep.metadata['slope']:.3f}, "
      f"sup gap sqrt(t)/V_T^2 = {rep.worst:.4f}")

bump = solve_bump(init.grid, p, s.m)
rep = check_eed(traj, "bump", p, bump=bump)
print(f"two-sided gap vs H^1 in the bump phase: ratio in "
      f"[{rep.worst_low:.3f}, {rep.worst:.3f}] over {rep.ratios.size} "
      f"snapshots (cap [1/{rep.cap:g}, {rep.cap:g}])")
