"""The (alpha, beta) Ricci-Yamabe map, its trace, and flow classification."""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from . import geometry as geo
from .errors import PositivityError, PreconditionError
from .geometry import CurvatureBundle, DiffSpec, MetricField

__all__ = [
    "RYParams",
    "Signature",
    "SignatureClass",
    "Character",
    "FlowCharacter",
    "metric_time_derivative",
    "flow_curvature",
    "ry_eval",
    "ry_eval_2d_conformal",
    "classify_signature",
    "volume_variation_rate",
    "classify_character",
    "steady_residual",
]

TIME_STEP = 1e-4


@dataclass(frozen=True)
class RYParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)):
            raise ValueError("alpha and beta must be finite")

    @property
    def sum(self) -> float:
        return self.alpha + self.beta

    def mix(self, n: int) -> float:
        """``2 alpha + n beta``, the coefficient of R in the trace of the map."""
        return 2.0 * self.alpha + n * self.beta


class Signature(enum.Enum):
    RIEMANNIAN = "Riemannian"
    SEMI_RIEMANNIAN = "SemiRiemannian"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class SignatureClass:
    kind: Signature
    min_eigenvalue: float
    max_eigenvalue: float


class Character(enum.Enum):
    EXPANDING = "Expanding"
    STEADY = "Steady"
    SHRINKING = "Shrinking"
    MIXED = "Mixed"


@dataclass(frozen=True)
class FlowCharacter:
    kind: Character
    uniform: bool
    rates: tuple = field(default=(), repr=False)

    @property
    def min_rate(self) -> float:
        return min(r for _, _, r in self.rates)

    @property
    def max_rate(self) -> float:
        return max(r for _, _, r in self.rates)


def metric_time_derivative(flow: MetricField, t: float, p, dt: float = TIME_STEP) -> np.ndarray:
    """Exact ``d_t g`` when attached, otherwise a 4th-order central difference in time."""
    exact = flow.dt(t, p)
    if exact is not None:
        return exact
    return geo.time_derivative(lambda s: flow(s, p), t, dt=dt, order=4)


def flow_curvature(flow: MetricField, t: float, p, spec: Optional[DiffSpec] = None,
                   curvature: str = "auto") -> CurvatureBundle:
    """Curvature from the attached closed form or from the finite-difference engine.

    ``curvature`` is ``"auto"`` (closed form if attached), ``"engine"`` or ``"exact"``.
    """
    if curvature not in ("auto", "engine", "exact"):
        raise ValueError(f"unknown curvature source {curvature!r}")
    if curvature != "engine" and flow.exact_curvature is not None:
        return flow.exact_curvature(t, geo.as_point(p))
    if curvature == "exact":
        raise PreconditionError(f"{flow.name} has no closed-form curvature attached")
    return geo.curvature(flow, t, p, spec or geo.DEFAULT_SPEC)


def ry_eval(flow: MetricField, t: float, p, params: RYParams, spec: Optional[DiffSpec] = None,
            curvature: str = "auto") -> np.ndarray:
    """``d_t g + 2 alpha Ric + beta R g`` at ``(t, p)``."""
    p = geo.as_point(p)
    g = flow(t, p)
    out = metric_time_derivative(flow, t, p)
    if params.alpha == 0.0 and params.beta == 0.0:
        return out
    bundle = flow_curvature(flow, t, p, spec, curvature)
    out = out + 2.0 * params.alpha * bundle.ricci + params.beta * bundle.scalar * g
    return 0.5 * (out + out.T)


def ry_eval_2d_conformal(lam: Callable[[float, np.ndarray], float], t: float, p, params: RYParams,
                         spec: Optional[DiffSpec] = None,
                         lam_dt: Optional[Callable[[float, np.ndarray], float]] = None) -> np.ndarray:
    """RY map of ``lam(t, u, v) (du^2 + dv^2)`` via the isothermal curvature formula."""
    p = geo.as_point(p)
    spec = spec or geo.DEFAULT_SPEC
    value = float(lam(t, p))
    if not value > 0:
        raise PositivityError(f"conformal factor {value} <= 0 at t={t}, p={p.tolist()}")
    if lam_dt is not None:
        rate = float(lam_dt(t, p))
    else:
        rate = float(geo.time_derivative(lambda s: lam(s, p), t, dt=TIME_STEP, order=4))
    K = geo.gauss_isothermal(lambda q: lam(t, q), p, spec)
    return (rate + 2.0 * params.sum * K * value) * np.eye(2)


def classify_signature(T, tol: Optional[float] = None) -> SignatureClass:
    """Riemannian / semi-Riemannian / degenerate by eigenvalue signs.

    Default ``tol`` is ``1e-9 * (1 + spectral radius)``.
    """
    T = np.asarray(T, dtype=float)
    eig = np.linalg.eigvalsh(0.5 * (T + T.T))
    if tol is None:
        tol = 1e-9 * (1.0 + float(np.max(np.abs(eig))))
    if np.any(np.abs(eig) <= tol):
        kind = Signature.DEGENERATE
    elif np.all(eig > tol):
        kind = Signature.RIEMANNIAN
    else:
        kind = Signature.SEMI_RIEMANNIAN
    return SignatureClass(kind, float(eig[0]), float(eig[-1]))


def volume_variation_rate(flow: MetricField, t: float, p, params: RYParams,
                          spec: Optional[DiffSpec] = None, curvature: str = "auto") -> float:
    """``Tr_g RY = g^ij RY_ij``."""
    g = flow(t, p)
    ry = ry_eval(flow, t, p, params, spec, curvature)
    return float(np.einsum("ij,ij->", np.linalg.inv(g), ry))


def steady_residual(flow: MetricField, t: float, p, params: RYParams, spec: Optional[DiffSpec] = None,
                    curvature: str = "auto") -> float:
    """``(2 alpha + n beta) R + Tr_g(d_t g)``; zero exactly on steady flows."""
    p = geo.as_point(p)
    ginv = np.linalg.inv(flow(t, p))
    trace_dt = float(np.einsum("ij,ij->", ginv, metric_time_derivative(flow, t, p)))
    mix = params.mix(flow.dim)
    if mix == 0.0:
        return trace_dt
    return mix * flow_curvature(flow, t, p, spec, curvature).scalar + trace_dt


def classify_character(flow: MetricField, params: RYParams, samples: Iterable, spec: Optional[DiffSpec] = None,
                       tol: float = 1e-8, curvature: str = "auto",
                       uniform_tol: float = 1e-6) -> FlowCharacter:
    """Sign of the volume variation over ``samples``, an iterable of ``(t, point)``.

    ``uniform`` requires the spatial spread at each sampled time to be at most
    ``uniform_tol * (1 + |mean rate|)``.
    """
    rates = []
    for t, p in samples:
        p = geo.as_point(p)
        rates.append((float(t), tuple(p.tolist()),
                      volume_variation_rate(flow, t, p, params, spec, curvature)))
    if not rates:
        raise ValueError("classify_character needs at least one sample")
    values = np.array([r for _, _, r in rates])
    if np.all(values > tol):
        kind = Character.EXPANDING
    elif np.all(values < -tol):
        kind = Character.SHRINKING
    elif np.all(np.abs(values) <= tol):
        kind = Character.STEADY
    else:
        kind = Character.MIXED

    by_time = defaultdict(list)
    for t, _, r in rates:
        by_time[t].append(r)
    uniform = all(
        np.ptp(v) <= uniform_tol * (1.0 + abs(float(np.mean(v)))) for v in by_time.values()
    )
    return FlowCharacter(kind, bool(uniform), tuple(rates))
