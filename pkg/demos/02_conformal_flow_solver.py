"""Evolving a conformal factor on a grid and checking it against the exact cigar.

Run with ``python3 demos/02_conformal_flow_solver.py``.
"""

import math

import numpy as np

from rymap import variation as var
from rymap.pde import (BoundaryCondition, Chart, ConformalGridState, SolverConfig, chart_transfer,
                       grid_liouville_residual, run_flow, stable_dt)
from rymap.ry import RYParams

ricci = RYParams(1.0, 0.0)


def exact(t, x, y):
    # h = -ln(e^{4t} + r^2) solves h_t = e^{-h} Lap h
    return -np.log(np.exp(4 * t) + x**2 + y**2)


# %% Grid refinement on [-2, 2]^2 with exact boundary values
T = 0.1
for n in (21, 41, 81):
    d = 4.0 / (n - 1)
    s = ConformalGridState(Chart.CARTESIAN, np.zeros((n, n)), (d, d), (-2, -2), 0.0,
                           BoundaryCondition.dirichlet(exact))
    s = s.with_h(exact(0, *s.coords()), 0.0)
    steps = math.ceil(T / (0.5 * stable_dt(s, ricci)))
    out = run_flow(s, SolverConfig(ricci, T / steps, steps), snapshot_every=steps).final
    print(f"n = {n:3d}  max error {np.max(np.abs(out.h - exact(T, *out.coords()))):.3e}")

# %% Reading the solution in parabolic coordinates
# x = (u^2 - v^2) / 2, y = u v; the same h satisfies (e^h)_t = Lap_uv h / (u^2 + v^2).
before = out
after = run_flow(out, SolverConfig(ricci, T / steps, 2)).snapshots
mid, last = after[1], after[2]
grid = dict(origin=(1.2, -0.6), spacing=(d / 2, d / 2), shape=(int(0.6 / (d / 2)) + 1, int(1.2 / (d / 2)) + 1))
b, m, a = (chart_transfer(st, Chart.PARABOLIC_UV, **grid) for st in (before, mid, last))
r = grid_liouville_residual(b, m, a, ricci)
print(f"parabolic-chart residual, interior max {np.nanmax(np.abs(r[1:-1, 1:-1])):.3e}")

# %% Curvature lower bound on a torus
n = 64
d = 2 * np.pi / n
x = d * np.arange(n)
X, Y = np.meshgrid(x, x, indexing="ij")
torus = ConformalGridState(Chart.CARTESIAN, np.sin(X) * np.sin(Y), (d, d), (0, 0))
steps = math.ceil(0.2 / (0.9 * stable_dt(torus, ricci)))
traj = run_flow(torus, SolverConfig(ricci, 0.2 / steps, steps), snapshot_every=steps // 5)
for row in var.curvature_lower_bound_check(traj, ricci).rows:
    t, kmin, bound, trunc, ok = row
    print(f"t = {t:.3f}  min K = {kmin:+.4f}  bound {bound:+.3f}  {'ok' if ok else 'VIOLATED'}")
