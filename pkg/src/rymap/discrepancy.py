"""Side-by-side comparison of printed closed forms against independent evaluations.

Each :class:`DiscrepancyRecord` evaluates one printed closed form and an
independent route (the finite-difference engine or an exact derivation) at
a fixed configuration, and stores both values with the relative gap
``|printed - engine| / max(|printed|, |engine|)`` (norms for arrays; zero
when both vanish).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, List

import numpy as np

from . import flows
from .flows import GeneralizedCigar, Poincare, Potential, WarpedGeneral, WarpedRotSym
from .geometry import DiffSpec
from .pde import residuals as res
from .ry import RYParams, ry_eval, volume_variation_rate

__all__ = ["DiscrepancyRecord", "relative_gap", "discrepancy_records", "RECORD_BUILDERS"]

ENGINE_SPEC = DiffSpec(1e-3, 2, True)


@dataclass(frozen=True)
class DiscrepancyRecord:
    equation_id: str
    description: str
    configuration: str
    printed_value: tuple
    engine_value: tuple
    relative_gap: float
    printed_source: str = "printed closed form"
    engine_source: str = "finite-difference engine"

    def to_dict(self) -> dict:
        return asdict(self)


def relative_gap(printed, engine) -> float:
    p = np.atleast_1d(np.asarray(printed, dtype=float))
    e = np.atleast_1d(np.asarray(engine, dtype=float))
    scale = max(float(np.linalg.norm(p)), float(np.linalg.norm(e)))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(p - e) / scale)


def _record(eq, description, configuration, printed, engine, engine_source="finite-difference engine"):
    p = tuple(float(x) for x in np.ravel(printed))
    e = tuple(float(x) for x in np.ravel(engine))
    return DiscrepancyRecord(eq, description, configuration, p, e, relative_gap(p, e),
                             engine_source=engine_source)


def _warped_general():
    kind = WarpedGeneral(Potential.exponential(1.0), lambda u: (1.0 + u * u) ** 2)
    params, t, p = RYParams(1.0, 0.0), 0.3, np.array([0.7, 0.2])
    flow = flows.make_flow(kind)
    return _record("eq1.20", "warped RY map with a general warping function",
                   "f=exp(t), G(u)=(1+u^2)^2, alpha=1, beta=0, t=0.3, p=(0.7, 0.2)",
                   flows.printed_ry(kind, t, p, params),
                   ry_eval(flow, t, p, params, ENGINE_SPEC, curvature="engine"))


def _warped_rot():
    kind = WarpedRotSym(Potential.exponential(1.0), 1.0)
    params, t, p = RYParams(1.0, 0.0), 0.3, np.array([0.7, 0.2])
    flow = flows.make_flow(kind)
    return _record("eq1.21", "warped RY map, constant-curvature warping sn_k",
                   "f=exp(t), k=1, alpha=1, beta=0, t=0.3, p=(0.7, 0.2)",
                   flows.printed_ry(kind, t, p, params),
                   ry_eval(flow, t, p, params, ENGINE_SPEC, curvature="engine"))


def _poincare_volume():
    kind = Poincare(2)
    params, t, p = RYParams(1.0, 0.0), 0.5, np.array([0.3, 1.7])
    flow = flows.make_flow(kind)
    rate, _ = flows.printed_volume_variation(kind, t, p, params)
    return _record("eq2.4", "Poincare volume variation, time derivative of the printed accumulated value",
                   "n=2, alpha=1, beta=0, t=0.5, p=(0.3, 1.7)", rate,
                   volume_variation_rate(flow, t, p, params, ENGINE_SPEC, curvature="engine"))


def _cigar_volume():
    kind = GeneralizedCigar(Potential.exponential(2.0))
    params, t, p = RYParams(0.6, 0.0), 0.1, np.array([0.3, 0.4])
    flow = flows.make_flow(kind)
    rate, _ = flows.printed_volume_variation(kind, t, p, params)
    return _record("eq2.5", "cigar volume variation; the printed rate is half the trace",
                   "f=exp(2t), alpha=0.6, beta=0, t=0.1, p=(0.3, 0.4)", rate,
                   volume_variation_rate(flow, t, p, params, ENGINE_SPEC, curvature="engine"))


def _cigar_field():
    """``h = -ln(e^{4t} + u^2 + v^2)``, the Cartesian cigar Ricci flow, with exact jet."""

    def jet(t, u, v):
        s = math.exp(4 * t) + u * u + v * v
        return res.Jet(-math.log(s), -4 * math.exp(4 * t) / s, -2 * u / s, -2 * v / s,
                       -2 / s + 4 * u * u / s**2, 4 * u * v / s**2, -2 / s + 4 * v * v / s**2)

    return res.Field(lambda t, u, v: -math.log(math.exp(4 * t) + u * u + v * v), jet)


def _polar():
    h, point, t = _cigar_field(), (0.8, 0.6), 0.05
    printed = res.residual_polar(h, point, t, form="printed")
    full = res.residual_polar(h, point, t, form="full")
    return _record("eq3.5", "polar flow residual of the cigar solution without / with first-order terms",
                   "h=-ln(e^{4t}+u^2+v^2), (x, y)=(0.8, 0.6), t=0.05", printed, full,
                   engine_source="full transformed Laplacian")


def _polar_sum():
    f = res.Profile(lambda t, s: 0.3 * s + 0.1 * t, lambda t, s: res.Jet1(0.3 * s + 0.1 * t, 0.1, 0.3, 0.0))
    g = res.Profile(lambda t, s: 0.2 * s * s + 0.2 * t, lambda t, s: res.Jet1(0.2 * s * s + 0.2 * t, 0.2, 0.4 * s, 0.4))
    point, t = (0.9, 0.4), 0.0
    printed = res.separable_residual("Polar", "Sum", f, g, point, t)
    u, v = point[0] * math.cos(point[1]), point[0] * math.sin(point[1])
    hsum = res.Field(lambda tt, a, b: f(tt, a) + g(tt, b))
    full = res.residual_polar(hsum, point, t, form="printed")
    return _record("eq3.8", "polar additive separation: exponent exp(f g) as printed vs exp(f + g)",
                   f"f=0.3u+0.1t, g=0.2v^2+0.2t, (x, y)=(0.9, 0.4) -> (u, v)=({u:.6g}, {v:.6g}), t=0",
                   printed, full, engine_source="polar residual of h = f + g")


def _parabolic():
    # Cartesian cigar solution pulled back to parabolic (u, v) solves the Liouville-chart equation;
    # the printed form is evaluated on the same function of (xi, eta)
    cig = _cigar_field()
    u, v, t = 1.1, 0.7, 0.05
    xi, eta = 0.5 * (u * u - v * v), u * v
    printed = res.residual_parabolic(cig, (xi, eta), t)
    liouville = res.residual_liouville(
        lambda tt, a, b: cig(tt, 0.5 * (a * a - b * b), a * b), (u, v), t)
    return _record("eq3.9", "parabolic flow residual of the cigar solution: printed form vs Liouville chart",
                   f"h=-ln(e^{{4t}}+xi^2+eta^2), (u, v)=({u}, {v}), t=0.05", printed, liouville,
                   engine_source="Liouville-chart residual")


def _elliptic_laplacians():
    u, v, c = -0.7, 0.3, 1.3
    return _record("eq3.14", "flat (u, v) Laplacians of the elliptic coordinates x and y",
                   f"(u, v)=({u}, {v}), c={c}", res.elliptic_laplacians(u, v, c),
                   res.elliptic_laplacians_exact(u, v, c), engine_source="exact differentiation")


def _elliptic_solitonic():
    u, v, c, a = -0.7, 0.3, 1.3, 0.5
    phi = res.Profile.polynomial([0.0, 0.4, 0.3])
    printed = res.solitonic_residual("EllipticUV", phi, a, (u, v), 0.0, c)

    def jet(t, x, y):
        j = phi.jet(t, x + a * y)
        return res.Jet(j.value, j.dt, j.ds, a * j.ds, j.dss, a * j.dss, a * a * j.dss)

    h = res.Field(lambda t, x, y: phi(t, x + a * y), jet)
    substituted = res.residual_elliptic(h, (u, v), c, 0.0)
    return _record("eq3.15", "elliptic travelling-wave residual vs the elliptic flow residual of h = phi(x + a y)",
                   f"phi=0.4w+0.3w^2, a={a}, (u, v)=({u}, {v}), c={c}, static", printed, substituted,
                   engine_source="elliptic flow residual after substitution")


RECORD_BUILDERS: List[Callable[[], DiscrepancyRecord]] = [
    _warped_general,
    _warped_rot,
    _poincare_volume,
    _cigar_volume,
    _polar,
    _polar_sum,
    _parabolic,
    _elliptic_laplacians,
    _elliptic_solitonic,
]


def discrepancy_records() -> List[DiscrepancyRecord]:
    return [build() for build in RECORD_BUILDERS]
