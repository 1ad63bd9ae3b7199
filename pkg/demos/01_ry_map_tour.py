"""A short tour of the Ricci-Yamabe map on the built-in flows.

Run with ``python3 demos/01_ry_map_tour.py``.
"""

import numpy as np

from rymap import flows as fl
from rymap import ry
from rymap.geometry import DiffSpec, curvature

np.set_printoptions(precision=6, suppress=True)

# %% Curvature of a static metric
# The cigar (du^2 + dv^2) / (1 + u^2 + v^2) has Gaussian curvature 2 / (1 + r^2).
cigar_now = fl.make_flow(fl.GeneralizedCigar(fl.Potential.constant(1.0)))
b = curvature(cigar_now, 0.0, [0.3, 0.4])
print("scalar curvature at (0.3, 0.4):", b.scalar, "expected", 4 / 1.25)

# %% The RY map vanishes on the steady cigar
# With f(t) = exp(4 (alpha + beta) t) the generalized cigar is an RY flow.
params = ry.RYParams(0.5, 0.5)
steady = fl.make_flow(fl.GeneralizedCigar(fl.cigar_steady_potential(params)))
for step in (0.1, 0.05, 0.025):
    T = ry.ry_eval(steady, 0.3, [0.3, 0.4], params, DiffSpec(step, 2, False), curvature="engine")
    print(f"step {step:<6} |RY| = {np.max(np.abs(T)):.3e}")  # drops by about 4 per halving

# %% Signature and volume variation
# Any other exponential rate breaks steadiness; the trace of RY gives the sign.
for rate in (1.5, 2.0, 2.5):
    flow = fl.make_flow(fl.GeneralizedCigar(fl.Potential.exponential(rate)))
    ch = ry.classify_character(flow, ry.RYParams(0.5, 0.0), [(0.0, [0, 0]), (0.5, [1, -1])])
    print(f"f = exp({rate} t): {ch.kind.value}")

# %% Printed closed forms next to the engine
poincare = fl.Poincare(2)
engine = ry.ry_eval(fl.make_flow(poincare), 0.0, [0.0, 1.5], ry.RYParams(1, 0))
print("Poincare half-plane at y = 1.5\n engine :", engine.ravel(), "\n printed:",
      fl.printed_ry(poincare, 0.0, np.array([0.0, 1.5]), ry.RYParams(1, 0)).ravel())
