"""Catalog of explicit Riemannian flows and their printed closed forms.

Each flow kind is a small frozen dataclass.  :func:`make_flow` turns one into a
:class:`~rymap.geometry.MetricField` carrying the exact time derivative and,
where an independent derivation is available, the exact curvature.  The
``printed_*`` functions return the closed forms as printed, including those
that disagree with a direct computation; :mod:`rymap.discrepancy` measures
the disagreements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate

from . import geometry as geo
from .errors import ClosedFormUnavailable, EvaluationDomainError, PreconditionError
from .geometry import CurvatureBundle, MetricField
from .ry import RYParams

__all__ = [
    "Potential",
    "SnK",
    "Conformal",
    "Cone",
    "ConvexEuclidean",
    "Poincare",
    "GeneralizedCigar",
    "WarpedRotSym",
    "WarpedGeneral",
    "euclidean",
    "hyperbolic",
    "round_sphere",
    "make_flow",
    "printed_ric_scalar",
    "printed_ry",
    "printed_volume_variation",
    "cigar_steady_potential",
]

QUAD_TOL = 1e-10


# ---------------------------------------------------------------------------
# time profiles


@dataclass(frozen=True)
class Potential:
    """A positive function of time with optional closed-form companions.

    ``inv_integral(t)`` is an antiderivative of ``1/f`` and ``inv_sqrt_integral``
    one of ``1/sqrt(f)``.  Missing ones fall back to adaptive quadrature from 0.
    """

    fn: Callable[[float], float]
    deriv: Optional[Callable[[float], float]] = None
    inv_integral: Optional[Callable[[float], float]] = None
    inv_sqrt_integral: Optional[Callable[[float], float]] = None
    label: str = "f"

    def __call__(self, t: float) -> float:
        return float(self.fn(t))

    def d(self, t: float) -> float:
        if self.deriv is not None:
            return float(self.deriv(t))
        return float(geo.time_derivative(lambda s: self.fn(s), t, dt=1e-3, order=4, richardson=True))

    def F(self, t: float) -> float:
        """Antiderivative of ``1/f``."""
        if self.inv_integral is not None:
            return float(self.inv_integral(t))
        return _quad(lambda s: 1.0 / self.fn(s), t)

    def F_sqrt(self, t: float) -> float:
        """Antiderivative of ``1/sqrt(f)``."""
        if self.inv_sqrt_integral is not None:
            return float(self.inv_sqrt_integral(t))
        return _quad(lambda s: 1.0 / math.sqrt(self.fn(s)), t)

    @classmethod
    def exponential(cls, rate: float) -> "Potential":
        """``e^(rate t)``; antiderivatives vanish at ``t = 0``."""
        c = float(rate)
        if c == 0.0:
            return cls.constant(1.0)
        return cls(
            fn=lambda t: math.exp(c * t),
            deriv=lambda t: c * math.exp(c * t),
            inv_integral=lambda t: -math.expm1(-c * t) / c,
            inv_sqrt_integral=lambda t: -2.0 * math.expm1(-0.5 * c * t) / c,
            label=f"exp({c:.17g} t)",
        )

    @classmethod
    def constant(cls, value: float = 1.0) -> "Potential":
        v = float(value)
        return cls(lambda t: v, lambda t: 0.0, lambda t: t / v, lambda t: t / math.sqrt(v), label=f"{v:.17g}")

    @classmethod
    def linear(cls, intercept: float, slope: float) -> "Potential":
        """``intercept + slope t``; antiderivatives vanish at ``t = 0``."""
        a, b = float(intercept), float(slope)
        if b == 0.0:
            return cls.constant(a)
        return cls(
            fn=lambda t: a + b * t,
            deriv=lambda t: b,
            inv_integral=lambda t: math.log((a + b * t) / a) / b,
            inv_sqrt_integral=lambda t: 2.0 * (math.sqrt(a + b * t) - math.sqrt(a)) / b,
            label=f"{a:.17g} + {b:.17g} t",
        )

    @classmethod
    def power(cls, exponent: float) -> "Potential":
        """``t^p`` on ``t > 0``; uses the antiderivative without additive constant."""
        p = float(exponent)

        def integral(q):
            if q == 1.0:
                return lambda t: math.log(t)
            return lambda t: t ** (1.0 - q) / (1.0 - q)

        return cls(
            fn=lambda t: t**p,
            deriv=lambda t: p * t ** (p - 1.0),
            inv_integral=integral(p),
            inv_sqrt_integral=integral(0.5 * p),
            label=f"t^{p:.17g}",
        )


def _quad(fn, t):
    val, _ = integrate.quad(fn, 0.0, t, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    return float(val)


def _as_potential(f) -> Potential:
    return f if isinstance(f, Potential) else Potential(f)


@dataclass(frozen=True)
class SnK:
    """Solution of ``y'' + k y = 0`` with ``y(0) = 0``, ``y'(0) = 1``."""

    k: float

    def _series(self, u):
        k, u2 = self.k, u * u
        return u * (1.0 - k * u2 / 6.0 + k * k * u2 * u2 / 120.0 - k**3 * u2**3 / 5040.0)

    def __call__(self, u: float) -> float:
        k = self.k
        if abs(k) * u * u < 1e-6:
            return self._series(u)
        if k > 0:
            s = math.sqrt(k)
            return math.sin(s * u) / s
        s = math.sqrt(-k)
        return math.sinh(s * u) / s

    def d1(self, u: float) -> float:
        k = self.k
        if abs(k) * u * u < 1e-6:
            u2 = u * u
            return 1.0 - k * u2 / 2.0 + k * k * u2 * u2 / 24.0 - k**3 * u2**3 / 720.0
        if k > 0:
            return math.cos(math.sqrt(k) * u)
        return math.cosh(math.sqrt(-k) * u)

    def d2(self, u: float) -> float:
        return -self.k * self(u)


# ---------------------------------------------------------------------------
# static base metrics


def _conformal_christoffel(dlog):
    """Levi-Civita symbols of ``lam * delta`` given the gradient of ``ln lam``."""
    n = dlog.size
    eye = np.eye(n)
    gam = 0.5 * (np.einsum("ki,j->kij", eye, dlog) + np.einsum("kj,i->kij", eye, dlog)
                 - np.einsum("ij,k->kij", eye, dlog))
    return gam


def _einstein_bundle(n, sign, lam, dlog):
    g = lam * np.eye(n)
    ric = sign * (n - 1) * g
    scalar = float(sign * n * (n - 1))
    return CurvatureBundle(_conformal_christoffel(dlog), ric, scalar, 0.5 * scalar if n == 2 else None)


def euclidean(n: int) -> MetricField:
    zero = np.zeros((n, n))
    return MetricField(
        dim=n,
        func=lambda t, p: np.eye(n),
        exact_dt=lambda t, p: zero,
        exact_curvature=lambda t, p: CurvatureBundle(np.zeros((n, n, n)), zero.copy(), 0.0,
                                                     0.0 if n == 2 else None),
        name=f"euclidean{n}",
    )


def hyperbolic(n: int) -> MetricField:
    """Half-space model ``|dx|^2 / (x^n)^2``, curvature -1."""

    def bundle(t, p):
        y = p[-1]
        dlog = np.zeros(n)
        dlog[-1] = -2.0 / y
        return _einstein_bundle(n, -1.0, 1.0 / y**2, dlog)

    return MetricField(
        dim=n,
        func=lambda t, p: np.eye(n) / p[-1] ** 2,
        exact_dt=lambda t, p: np.zeros((n, n)),
        exact_curvature=bundle,
        domain=lambda t, p: p[-1] > 0,
        name=f"hyperbolic{n}",
    )


def round_sphere(n: int) -> MetricField:
    """Stereographic chart ``4 |dx|^2 / (1 + |x|^2)^2``, curvature +1."""

    def bundle(t, p):
        s = 1.0 + p @ p
        return _einstein_bundle(n, 1.0, 4.0 / s**2, -4.0 * p / s)

    return MetricField(
        dim=n,
        func=lambda t, p: 4.0 * np.eye(n) / (1.0 + p @ p) ** 2,
        exact_dt=lambda t, p: np.zeros((n, n)),
        exact_curvature=bundle,
        name=f"sphere{n}",
    )


# ---------------------------------------------------------------------------
# flow kinds


@dataclass(frozen=True)
class Conformal:
    """``g(t) = f(t) g`` for a static base metric ``g``."""

    f: Potential
    base: MetricField


def Cone(base: MetricField) -> Conformal:
    """Conformal flow with ``f(t) = t`` on ``t > 0``."""
    return Conformal(Potential.power(1.0), base)


@dataclass(frozen=True)
class ConvexEuclidean:
    """``g(t) = ((1 - t) E + t) I`` on ``t in [0, 1]``, 2-D.

    ``grad`` and ``lap`` are optional closed forms of the flat gradient and
    Laplacian of ``E``; without them the printed form differences ``E``.
    """

    E: Callable[[np.ndarray], float]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    lap: Optional[Callable[[np.ndarray], float]] = None

    @classmethod
    def gaussian_bump(cls, amplitude: float = 0.5) -> "ConvexEuclidean":
        """``E = 1 + amplitude * exp(-(u^2 + v^2))``."""
        a = float(amplitude)
        return cls(
            E=lambda p: 1.0 + a * math.exp(-(p @ p)),
            grad=lambda p: -2.0 * a * p * math.exp(-(p @ p)),
            lap=lambda p: 4.0 * a * math.exp(-(p @ p)) * ((p @ p) - 1.0),
        )


@dataclass(frozen=True)
class Poincare:
    """``g(t) = (x^n)^(-t) |dx|^2`` on the upper half-space."""

    n: int = 2


@dataclass(frozen=True)
class GeneralizedCigar:
    """``g(t) = I / (f(t) + u^2 + v^2)`` with ``f(0) = 1``."""

    f: Potential


@dataclass(frozen=True)
class WarpedRotSym:
    """``g(t) = du^2 + f(t) sn_k(u)^2 dv^2`` with ``f(0) = 1``."""

    f: Potential
    k: float = 0.0


@dataclass(frozen=True)
class WarpedGeneral:
    """``g(t) = du^2 + f(t) G(u) dv^2`` with ``f(0) = 1`` and ``G > 0``."""

    f: Potential
    G: Callable[[float], float]


FlowKind = Union[Conformal, ConvexEuclidean, Poincare, GeneralizedCigar, WarpedRotSym, WarpedGeneral]


def _check_unit_start(f: Potential, label: str):
    if abs(f(0.0) - 1.0) > 1e-12:
        raise PreconditionError(f"{label} requires f(0) = 1, got {f(0.0)}")


def _positive_f(f: Potential):
    def check(t):
        try:
            return f(t) > 0
        except (ValueError, OverflowError, ZeroDivisionError):
            return False
    return check


def make_flow(kind: FlowKind) -> MetricField:
    """Build the metric field for a catalog entry."""
    if isinstance(kind, Conformal):
        return _conformal_flow(kind)
    if isinstance(kind, ConvexEuclidean):
        return _convex_flow(kind)
    if isinstance(kind, Poincare):
        return _poincare_flow(kind)
    if isinstance(kind, GeneralizedCigar):
        return _cigar_flow(kind)
    if isinstance(kind, WarpedRotSym):
        return _warped_rot_flow(kind)
    if isinstance(kind, WarpedGeneral):
        return _warped_general_flow(kind)
    raise TypeError(f"unknown flow kind {kind!r}")


def _conformal_flow(kind: Conformal) -> MetricField:
    f, base = _as_potential(kind.f), kind.base
    ok = _positive_f(f)
    exact = None
    if base.exact_curvature is not None:
        def exact(t, p):
            b = base.exact_curvature(t, p)
            gauss = b.scalar / (2.0 * f(t)) if base.dim == 2 else None
            return CurvatureBundle(b.christoffel, b.ricci, b.scalar / f(t), gauss)

    return MetricField(
        dim=base.dim,
        func=lambda t, p: f(t) * base(0.0, p),
        exact_dt=lambda t, p: f.d(t) * base(0.0, p),
        exact_curvature=exact,
        domain=lambda t, p: ok(t) and base.contains(0.0, p),
        name=f"conformal[{f.label}]({base.name})",
    )


def _convex_lambda(kind: ConvexEuclidean, t, p):
    return (1.0 - t) * kind.E(p) + t


def _convex_flow(kind: ConvexEuclidean) -> MetricField:
    def domain(t, p):
        return 0.0 <= t <= 1.0 and _convex_lambda(kind, t, p) > 0

    return MetricField(
        dim=2,
        func=lambda t, p: _convex_lambda(kind, t, p) * np.eye(2),
        exact_dt=lambda t, p: (1.0 - kind.E(p)) * np.eye(2),
        domain=domain,
        name="convex-euclidean",
    )


def _poincare_curvature(n, t, p):
    # g = exp(2 phi) delta with phi = -(t/2) ln y; standard conformal-change formula
    y = p[-1]
    dphi = np.zeros(n)
    dphi[-1] = -0.5 * t / y
    hess = np.zeros((n, n))
    hess[-1, -1] = 0.5 * t / y**2
    lap = hess[-1, -1]
    grad_sq = dphi @ dphi
    ric = -(n - 2) * (hess - np.outer(dphi, dphi)) - (lap + (n - 2) * grad_sq) * np.eye(n)
    lam = y ** (-t)
    scalar = float(np.trace(ric) / lam)
    return CurvatureBundle(_conformal_christoffel(2.0 * dphi), ric, scalar, 0.5 * scalar if n == 2 else None)


def _poincare_flow(kind: Poincare) -> MetricField:
    n = int(kind.n)
    if n < 2:
        raise PreconditionError("the Poincare flow needs n >= 2")
    return MetricField(
        dim=n,
        func=lambda t, p: p[-1] ** (-t) * np.eye(n),
        exact_dt=lambda t, p: -math.log(p[-1]) * p[-1] ** (-t) * np.eye(n),
        exact_curvature=lambda t, p: _poincare_curvature(n, t, p),
        domain=lambda t, p: p[-1] > 0,
        name=f"poincare{n}",
    )


def _cigar_flow(kind: GeneralizedCigar) -> MetricField:
    f = _as_potential(kind.f)
    _check_unit_start(f, "the generalized cigar flow")
    ok = _positive_f(f)

    def curv(t, p):
        s = f(t) + p @ p
        K = 2.0 * f(t) / s
        g = np.eye(2) / s
        return CurvatureBundle(_conformal_christoffel(-2.0 * p / s), K * g, 2.0 * K, K)

    return MetricField(
        dim=2,
        func=lambda t, p: np.eye(2) / (f(t) + p @ p),
        exact_dt=lambda t, p: -f.d(t) * np.eye(2) / (f(t) + p @ p) ** 2,
        exact_curvature=curv,
        domain=lambda t, p: ok(t),
        name=f"cigar[{f.label}]",
    )


def _warped_bundle(phi, dphi, ddphi, g):
    gam = np.zeros((2, 2, 2))
    gam[0, 1, 1] = -phi * dphi
    gam[1, 0, 1] = gam[1, 1, 0] = dphi / phi
    K = -ddphi / phi
    return CurvatureBundle(gam, K * g, 2.0 * K, K)


def _warped_rot_flow(kind: WarpedRotSym) -> MetricField:
    f = _as_potential(kind.f)
    _check_unit_start(f, "the warped flow")
    sn = SnK(kind.k)
    ok = _positive_f(f)

    def metric(t, p):
        return np.diag([1.0, f(t) * sn(p[0]) ** 2])

    def curv(t, p):
        r = math.sqrt(f(t))
        return _warped_bundle(r * sn(p[0]), r * sn.d1(p[0]), r * sn.d2(p[0]), metric(t, p))

    def domain(t, p):
        u = p[0]
        if not ok(t) or u <= 0:
            return False
        return kind.k <= 0 or u < math.pi / math.sqrt(kind.k)

    return MetricField(
        dim=2,
        func=metric,
        exact_dt=lambda t, p: np.diag([0.0, f.d(t) * sn(p[0]) ** 2]),
        exact_curvature=curv,
        domain=domain,
        name=f"warped[k={kind.k:.17g}]",
    )


def _warped_general_flow(kind: WarpedGeneral) -> MetricField:
    f = _as_potential(kind.f)
    _check_unit_start(f, "the warped flow")
    ok = _positive_f(f)
    return MetricField(
        dim=2,
        func=lambda t, p: np.diag([1.0, f(t) * kind.G(p[0])]),
        exact_dt=lambda t, p: np.diag([0.0, f.d(t) * kind.G(p[0])]),
        domain=lambda t, p: ok(t) and kind.G(p[0]) > 0,
        name="warped-general",
    )


# ---------------------------------------------------------------------------
# printed closed forms


def _base_curvature(base: MetricField, p) -> CurvatureBundle:
    if base.exact_curvature is not None:
        return base.exact_curvature(0.0, geo.as_point(p))
    return geo.curvature(base, 0.0, p)


def printed_ric_scalar(kind: FlowKind, t: float, p):
    """Printed Ricci tensor and scalar curvature (conformal and Poincare flows only)."""
    p = geo.as_point(p)
    if isinstance(kind, Conformal):
        b = _base_curvature(kind.base, p)
        return b.ricci.copy(), b.scalar / _as_potential(kind.f)(t)
    if isinstance(kind, Poincare):
        n = kind.n
        y = _half_space_height(p, n)
        tangential = np.diag([1.0] * (n - 1) + [0.0])
        normal = np.diag([0.0] * (n - 1) + [1.0])
        ric = ((2 - n) * t**2 - 2 * t) / (4 * y**2) * tangential + (1 - n) * t / (2 * y**2) * normal
        scalar = (1 - n) / y ** (2 - t) * (t + (n - 2) * t**2 / 4)
        return ric, float(scalar)
    raise ClosedFormUnavailable(f"no printed Ricci/scalar closed form for {type(kind).__name__}")


def _half_space_height(p, n):
    if p.size != n:
        raise ValueError(f"expected a point of dimension {n}")
    if not p[-1] > 0:
        raise EvaluationDomainError(f"the Poincare flow lives on x^n > 0, got {p[-1]}")
    return float(p[-1])


def _flat_log_laplacian(kind: ConvexEuclidean, t, p):
    lam = _convex_lambda(kind, t, p)
    if kind.grad is not None and kind.lap is not None:
        grad = (1.0 - t) * np.asarray(kind.grad(p), dtype=float)
        return (1.0 - t) * kind.lap(p) / lam - (grad @ grad) / lam**2
    spec = geo.DEFAULT_SPEC
    return sum(geo.second_derivative(lambda q: math.log(_convex_lambda(kind, t, q)), p, k, spec) for k in range(2))


def printed_ry(kind: FlowKind, t: float, p, params: RYParams) -> np.ndarray:
    """The printed RY closed form for ``kind`` at ``(t, p)``."""
    p = geo.as_point(p)
    a, b = params.alpha, params.beta
    if isinstance(kind, Conformal):
        f = _as_potential(kind.f)
        g = kind.base(0.0, p)
        bc = _base_curvature(kind.base, p)
        return (f.d(t) + b * bc.scalar) * g + 2.0 * a * bc.ricci
    if isinstance(kind, ConvexEuclidean):
        if not 0.0 <= t <= 1.0:
            raise EvaluationDomainError(f"the convex-Euclidean flow lives on t in [0, 1], got {t}")
        return (1.0 - kind.E(p) - params.sum * _flat_log_laplacian(kind, t, p)) * np.eye(2)
    if isinstance(kind, Poincare):
        n = kind.n
        y = _half_space_height(p, n)
        if n == 2:
            return (-(y ** (2 - t)) * math.log(y) - params.sum * t) / y**2 * np.eye(2)
        tangential = np.diag([1.0] * (n - 1) + [0.0])
        normal = np.diag([0.0] * (n - 1) + [1.0])
        scaled = ((1 - n) * b * (t + (n - 2) * t**2 / 4) - y ** (2 - t) * math.log(y)) * np.eye(n) \
            + ((1 - n / 2) * t**2 - t) * a * tangential + (1 - n) * a * t * normal
        return scaled / y**2
    if isinstance(kind, GeneralizedCigar):
        f = _as_potential(kind.f)
        s = f(t) + p @ p
        return (4.0 * params.sum * f(t) - f.d(t)) / s**2 * np.eye(2)
    if isinstance(kind, WarpedRotSym):
        f = _as_potential(kind.f)
        sn = SnK(kind.k)
        g = np.diag([1.0, f(t) * sn(p[0]) ** 2])
        out = -2.0 * kind.k * params.sum / math.sqrt(f(t)) * g
        out[1, 1] += f.d(t) * sn(p[0]) ** 2
        return out
    if isinstance(kind, WarpedGeneral):
        f = _as_potential(kind.f)
        u = p[0]
        G = kind.G(u)
        g = np.diag([1.0, f(t) * G])
        # the printed Laplacian has no chart; taken as the flat (u, v) one, i.e. (ln G)''
        lap_log_g = float(geo.second_derivative(lambda q: math.log(kind.G(q[0])), np.array([u]), 0, geo.DEFAULT_SPEC))
        out = -params.sum / math.sqrt(f(t) * G) * lap_log_g * g
        out[1, 1] += f.d(t) * G
        return out
    raise ClosedFormUnavailable(f"no printed RY form for {type(kind).__name__}")


def printed_volume_variation(kind: FlowKind, t: float, p, params: RYParams):
    """Printed volume-variation rate and, where printed, its accumulated value.

    Returns ``(rate, accumulated)``.  Where only the accumulated value is
    printed the rate is its time derivative.
    """
    p = geo.as_point(p)
    s = params.sum
    if isinstance(kind, Conformal):
        f = _as_potential(kind.f)
        n = kind.base.dim
        R0 = _base_curvature(kind.base, p).scalar
        rate = (n * f.d(t) + params.mix(n) * R0) / f(t)
        accumulated = n * math.log(f(t)) + params.mix(n) * R0 * f.F(t)
        return rate, accumulated
    if isinstance(kind, Poincare):
        if kind.n != 2:
            raise ClosedFormUnavailable("the printed Poincare volume variation is two-dimensional")
        y = _half_space_height(p, 2)
        accumulated = -0.5 * s * t**2 + y ** (2 - t)
        rate = -s * t - y ** (2 - t) * math.log(y)
        return rate, accumulated
    if isinstance(kind, GeneralizedCigar):
        f = _as_potential(kind.f)
        return (4.0 * s * f(t) - f.d(t)) / (f(t) + p @ p), None
    if isinstance(kind, WarpedRotSym):
        f = _as_potential(kind.f)
        rate = f.d(t) / f(t) - 4.0 * kind.k * s / math.sqrt(f(t))
        accumulated = math.log(f(t)) - 4.0 * kind.k * s * f.F_sqrt(t)
        return rate, accumulated
    raise ClosedFormUnavailable(f"no printed volume variation for {type(kind).__name__}")


def cigar_steady_potential(params: RYParams) -> Potential:
    """``t -> exp(4 (alpha + beta) t)``, the potential making the cigar flow an RY flow."""
    return Potential.exponential(4.0 * params.sum)
