"""Pointwise residuals of the conformal flow written in the separable charts of the plane.

A field ``h(t, a, b)`` is either a plain callable, whose derivatives are taken
by finite differences, or a :class:`Field` carrying an exact ``jet``.  The
same holds for the one-variable profiles ``f(t, s)`` of the separable and
travelling-wave reductions (:class:`Profile`).

Sign conventions:

* flow and travelling-wave residuals are ``spatial side - time side``;
* separable residuals are ``left side - right side`` of each equation as written
  below, so the side holding the time derivative depends on the chart.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .. import geometry as geo
from ..errors import EvaluationDomainError
from ..geometry import DiffSpec
from ..ry import RYParams
from .charts import elliptic_forward
from .solver import Chart

__all__ = [
    "RICCI",
    "Jet",
    "Jet1",
    "Field",
    "Profile",
    "Mode",
    "field_jet",
    "profile_jet",
    "polar_coefficients",
    "polar_first_order_term",
    "residual_polar",
    "residual_parabolic",
    "residual_liouville",
    "elliptic_coefficients",
    "elliptic_laplacians",
    "elliptic_laplacians_exact",
    "residual_elliptic",
    "solitonic_residual",
    "separable_residual",
    "grid_liouville_residual",
]

RICCI = RYParams(1.0, 0.0)
TIME_STEP = 1e-4


@dataclass(frozen=True)
class Jet:
    """Value and derivatives of ``h(t, a, b)`` up to second order in space, first in time."""

    value: float
    dt: float = 0.0
    d1: float = 0.0
    d2: float = 0.0
    d11: float = 0.0
    d12: float = 0.0
    d22: float = 0.0


@dataclass(frozen=True)
class Jet1:
    """Value, time derivative and two space derivatives of ``f(t, s)``."""

    value: float
    dt: float = 0.0
    ds: float = 0.0
    dss: float = 0.0


@dataclass(frozen=True)
class Field:
    fn: Callable[[float, float, float], float]
    jet: Optional[Callable[[float, float, float], Jet]] = None

    def __call__(self, t, a, b):
        return self.fn(t, a, b)

    @classmethod
    def constant(cls, c: float) -> "Field":
        return cls(lambda t, a, b: c, lambda t, a, b: Jet(float(c)))


@dataclass(frozen=True)
class Profile:
    fn: Callable[[float, float], float]
    jet: Optional[Callable[[float, float], Jet1]] = None

    def __call__(self, t, s):
        return self.fn(t, s)

    @classmethod
    def constant(cls, c: float) -> "Profile":
        return cls(lambda t, s: c, lambda t, s: Jet1(float(c)))

    @classmethod
    def polynomial(cls, coeffs) -> "Profile":
        """Static polynomial ``sum coeffs[k] s^k`` with exact derivatives."""
        poly = np.polynomial.Polynomial(coeffs)
        d1, d2 = poly.deriv(1), poly.deriv(2)
        return cls(lambda t, s: float(poly(s)), lambda t, s: Jet1(float(poly(s)), 0.0, float(d1(s)), float(d2(s))))


FieldLike = Union[Field, Callable[[float, float, float], float]]
ProfileLike = Union[Profile, Callable[[float, float], float]]


class Mode(enum.Enum):
    PRODUCT = "Product"
    SUM = "Sum"


def field_jet(h: FieldLike, t: float, a: float, b: float, spec: Optional[DiffSpec] = None) -> Jet:
    if isinstance(h, Field) and h.jet is not None:
        return h.jet(t, a, b)
    spec = spec or geo.DEFAULT_SPEC
    fn = h.fn if isinstance(h, Field) else h
    g = lambda q: float(fn(t, q[0], q[1]))
    p = np.array([a, b], dtype=float)
    return Jet(
        value=float(fn(t, a, b)),
        dt=float(geo.time_derivative(lambda s: fn(s, a, b), t, dt=TIME_STEP)),
        d1=float(geo.derivative(g, p, 0, spec)),
        d2=float(geo.derivative(g, p, 1, spec)),
        d11=float(geo.second_derivative(g, p, 0, spec)),
        d12=float(geo.derivative(lambda q: geo.derivative(g, q, 1, spec), p, 0, spec)),
        d22=float(geo.second_derivative(g, p, 1, spec)),
    )


def profile_jet(f: ProfileLike, t: float, s: float, spec: Optional[DiffSpec] = None) -> Jet1:
    if isinstance(f, Profile) and f.jet is not None:
        return f.jet(t, s)
    spec = spec or geo.DEFAULT_SPEC
    fn = f.fn if isinstance(f, Profile) else f
    g = lambda q: float(fn(t, q[0]))
    p = np.array([s], dtype=float)
    return Jet1(
        value=float(fn(t, s)),
        dt=float(geo.time_derivative(lambda r: fn(r, s), t, dt=TIME_STEP)),
        ds=float(geo.derivative(g, p, 0, spec)),
        dss=float(geo.second_derivative(g, p, 0, spec)),
    )


def _time_side(j) -> float:
    return float(np.exp(j.value) * j.dt)


# ---------------------------------------------------------------------------
# polar chart: u = x cos y, v = x sin y


def polar_coefficients(x: float, y: float):
    """Coefficients of ``h_uu``, ``h_vv`` and ``h_uv`` in the second-order polar operator."""
    c, s = np.cos(y), np.sin(y)
    return c * c + x * x * s * s, s * s + x * x * c * c, 2.0 * s * c * (1.0 - x * x)


def _polar_check(x):
    if x == 0:
        raise EvaluationDomainError("polar chart is singular on the axis x = 0")


def polar_first_order_term(h: FieldLike, point, t: float = 0.0, spec: Optional[DiffSpec] = None) -> float:
    """``-x (h_u cos y + h_v sin y)``, the chain-rule term dropped by the second-order polar operator."""
    x, y = map(float, point)
    _polar_check(x)
    j = field_jet(h, t, x * np.cos(y), x * np.sin(y), spec)
    return float(-x * (j.d1 * np.cos(y) + j.d2 * np.sin(y)))


def residual_polar(h: FieldLike, point, t: float = 0.0, params: RYParams = RICCI,
                   spec: Optional[DiffSpec] = None, form: str = "printed") -> float:
    """Polar flow residual at ``(x, y)`` for ``h`` given over ``(u, v)``.

    ``form="printed"`` uses only the second-order operator; ``form="full"``
    adds the first-order chain-rule term, which makes the spatial side the
    flat ``(x, y)`` Laplacian of ``h(t, x cos y, x sin y)``.
    """
    if form not in ("printed", "full"):
        raise ValueError(f"unknown polar form {form!r}")
    x, y = map(float, point)
    _polar_check(x)
    j = field_jet(h, t, x * np.cos(y), x * np.sin(y), spec)
    cuu, cvv, cuv = polar_coefficients(x, y)
    spatial = cuu * j.d11 + cvv * j.d22 + cuv * j.d12
    if form == "full":
        spatial += -x * (j.d1 * np.cos(y) + j.d2 * np.sin(y))
    return float(params.sum * spatial - _time_side(j))


# ---------------------------------------------------------------------------
# parabolic chart: xi = (u^2 - v^2)/2, eta = u v


def residual_parabolic(h: FieldLike, point, t: float = 0.0, params: RYParams = RICCI,
                       spec: Optional[DiffSpec] = None) -> float:
    """``2 sqrt(xi^2 + eta^2) (h_xixi + h_etaeta) - (e^h)_t`` for ``h`` given over ``(xi, eta)``."""
    xi, eta = map(float, point)
    if xi == 0 and eta == 0:
        raise EvaluationDomainError("parabolic chart is singular at the origin")
    j = field_jet(h, t, xi, eta, spec)
    return float(params.sum * 2.0 * np.hypot(xi, eta) * (j.d11 + j.d22) - _time_side(j))


def residual_liouville(h: FieldLike, point, t: float = 0.0, params: RYParams = RICCI,
                       spec: Optional[DiffSpec] = None) -> float:
    """``(h_uu + h_vv) / (u^2 + v^2) - (e^h)_t`` for ``h`` given over the parabolic ``(u, v)``."""
    u, v = map(float, point)
    w = u * u + v * v
    if w == 0:
        raise EvaluationDomainError("parabolic chart is singular at u = v = 0")
    j = field_jet(h, t, u, v, spec)
    return float(params.sum * (j.d11 + j.d22) / w - _time_side(j))


def grid_liouville_residual(before, state, after, params: RYParams = RICCI, order: int = 4) -> np.ndarray:
    """Liouville residual on the interior of a parabolic ``(u, v)`` grid.

    ``before`` and ``after`` are the same grid one time step either side of
    ``state``; the time derivative is their central difference.  With
    ``order=4`` the Laplacian drops to second order on the ring next to the
    boundary.
    """
    from .solver import grid_laplacian

    dt = 0.5 * (after.t - before.t)
    ht = (after.h - before.h) / (2.0 * dt)
    lap = grid_laplacian(state.h, state.spacing, periodic=False, order=order)
    res = params.sum * lap / state.weight() - np.exp(state.h) * ht
    return res[1:-1, 1:-1]


# ---------------------------------------------------------------------------
# elliptic chart: x^2 = c^2 (u-1)(v-1), y^2 = -c^2 u v


def _elliptic_check(u, v):
    if u in (0.0, 1.0) or v in (0.0, 1.0):
        raise EvaluationDomainError(f"elliptic chart degenerates at u={u}, v={v}")
    if (u - 1.0) * (v - 1.0) < 0 or u * v > 0:
        raise EvaluationDomainError(f"elliptic chart has no real point at u={u}, v={v}")


def elliptic_coefficients(u: float, v: float):
    """``(v-u)/(u(u-1))``, ``v(1-v)/(u(u-1)) + u(1-u)/(v(v-1))`` and ``(u-v)/(v(v-1))``."""
    return ((v - u) / (u * (u - 1.0)),
            v * (1.0 - v) / (u * (u - 1.0)) + u * (1.0 - u) / (v * (v - 1.0)),
            (u - v) / (v * (v - 1.0)))


def elliptic_laplacians(u: float, v: float, c: float = 1.0):
    """Closed forms used for ``Lap_uv x`` and ``Lap_uv y`` in the elliptic flow equation."""
    lx = -c / 4.0 * (1.0 / (u - 1.0) * np.sqrt((v - 1.0) / (u - 1.0))
                     + 1.0 / (v - 1.0) * np.sqrt((u - 1.0) / (v - 1.0)))
    ly = -c / 4.0 * (1.0 / u * np.sqrt(-v / u) + 1.0 / v * np.sqrt(-u / v))
    return float(lx), float(ly)


def elliptic_laplacians_exact(u: float, v: float, c: float = 1.0):
    """Flat ``(u, v)`` Laplacians of ``x = c sqrt((u-1)(v-1))`` and ``y = c sqrt(-uv)`` by differentiation."""
    a, b = (u - 1.0) * (v - 1.0), -u * v
    lx = -c / 4.0 * ((v - 1.0) ** 2 + (u - 1.0) ** 2) / a**1.5
    ly = -c / 4.0 * (v * v + u * u) / b**1.5
    return float(lx), float(ly)


def residual_elliptic(h: FieldLike, point, c: float = 1.0, t: float = 0.0, params: RYParams = RICCI,
                      spec: Optional[DiffSpec] = None) -> float:
    """Elliptic flow residual at ``(u, v)`` for ``h`` given over ``(x, y)``."""
    u, v = map(float, point)
    _elliptic_check(u, v)
    x, y = elliptic_forward(u, v, c)
    j = field_jet(h, t, float(x), float(y), spec)
    lx, ly = elliptic_laplacians(u, v, c)
    A, B, C = elliptic_coefficients(u, v)
    spatial = j.d1 * lx + j.d2 * ly + c * c / 4.0 * (j.d11 * A + 2.0 * j.d12 * B + j.d22 * C)
    return float(params.sum * spatial - _time_side(j))


# ---------------------------------------------------------------------------
# travelling-wave and separable reductions


def _chart_of(kind) -> Chart:
    return kind if isinstance(kind, Chart) else Chart(kind)


def solitonic_residual(kind, phi: ProfileLike, a: float, point, t: float = 0.0, c: float = 1.0,
                       params: RYParams = RICCI, spec: Optional[DiffSpec] = None) -> float:
    """Residual of the travelling-wave reduction ``h = phi(t, w)``.

    ``w = u + a v`` (polar, point ``(x, y)``), ``w = xi + a eta`` (parabolic,
    point ``(xi, eta)``) or ``w = x + a y`` (elliptic, point ``(u, v)``).
    The elliptic form is evaluated term by term as written: the first-order
    part reads ``phi_w (Lap x + a h_y Lap y)`` with ``h_y = a phi_w`` and the
    second-order bracket carries no ``c^2/4`` factor.
    """
    kind = _chart_of(kind)
    p, q = map(float, point)
    if kind is Chart.POLAR:
        _polar_check(p)
        w = p * np.cos(q) + a * p * np.sin(q)
        j = profile_jet(phi, t, w, spec)
        cuu, cvv, cuv = polar_coefficients(p, q)
        spatial = j.dss * (cuu + a * a * cvv + a * cuv)
    elif kind is Chart.PARABOLIC_UV:
        if p == 0 and q == 0:
            raise EvaluationDomainError("parabolic chart is singular at the origin")
        j = profile_jet(phi, t, p + a * q, spec)
        spatial = 2.0 * np.hypot(p, q) * (1.0 + a * a) * j.dss
    elif kind is Chart.ELLIPTIC_UV:
        _elliptic_check(p, q)
        x, y = elliptic_forward(p, q, c)
        j = profile_jet(phi, t, float(x + a * y), spec)
        lx, ly = elliptic_laplacians(p, q, c)
        A, B, C = elliptic_coefficients(p, q)
        h_y = a * j.ds
        spatial = j.ds * (lx + a * h_y * ly) + j.dss * (A + 2.0 * a * B + a * a * C)
    else:
        raise ValueError(f"no travelling-wave reduction for chart {kind.value}")
    return float(params.sum * spatial - _time_side(j))


def separable_residual(kind, mode, f: ProfileLike, g: ProfileLike, point, t: float = 0.0, c: float = 1.0,
                       spec: Optional[DiffSpec] = None) -> float:
    """Left side minus right side of the separated equation for ``h = f g`` or ``h = f + g``.

    ``f`` depends on the first and ``g`` on the second Cartesian-type variable
    of the chart: ``(x, y)`` for Cartesian, ``(u, v)`` for polar (point given
    as ``(x, y)`` with ``u = x cos y``), ``(xi, eta)`` for parabolic and
    ``(x, y)`` for elliptic (point given as ``(u, v)``).

    The equations, term by term:

    * Cartesian product ``(f_t g + f g_t) e^(fg) = f_xx g + f g_yy``;
      sum ``(f_t + g_t) e^(f+g) = f_xx + g_yy``.
    * Polar product ``f_uu g Cuu + f g_vv Cvv + 2 f_u g_v s c (1-x^2) = (f_t g + f g_t) e^(fg)``;
      sum ``f_uu Cuu + g_vv Cvv = (f_t + g_t) e^(fg)`` (the exponent is the product here).
    * Parabolic product ``2 rho (f_xixi g + f g_etaeta) = (f_t g + f g_t) e^(fg)``;
      sum ``2 rho (f_xixi + g_etaeta) = (f_t + g_t) e^(f+g)``, ``rho = sqrt(xi^2 + eta^2)``.
    * Elliptic product ``(f_t g + f g_t) e^(fg) = f_x g Lx + f g_y Ly + f_xx g A + 2 f_x g_y B + f g_yy C``;
      sum ``(f_t + g_t) e^(f+g) = f_x Lx + g_y Ly + f_xx A + g_yy C``.
    """
    kind = _chart_of(kind)
    mode = mode if isinstance(mode, Mode) else Mode(mode)
    p, q = map(float, point)
    if kind is Chart.CARTESIAN:
        s1, s2 = p, q
    elif kind is Chart.POLAR:
        _polar_check(p)
        s1, s2 = p * np.cos(q), p * np.sin(q)
    elif kind is Chart.PARABOLIC_UV:
        if p == 0 and q == 0:
            raise EvaluationDomainError("parabolic chart is singular at the origin")
        s1, s2 = p, q
    else:
        _elliptic_check(p, q)
        x, y = elliptic_forward(p, q, c)
        s1, s2 = float(x), float(y)
    F, G = profile_jet(f, t, s1, spec), profile_jet(g, t, s2, spec)
    product = mode is Mode.PRODUCT
    if product:
        time_side = (F.dt * G.value + F.value * G.dt) * np.exp(F.value * G.value)
    else:
        time_side = (F.dt + G.dt) * np.exp(F.value + G.value)

    if kind is Chart.CARTESIAN:
        space = F.dss * G.value + F.value * G.dss if product else F.dss + G.dss
        return float(time_side - space)
    if kind is Chart.POLAR:
        cuu, cvv, cuv = polar_coefficients(p, q)
        if product:
            space = F.dss * G.value * cuu + F.value * G.dss * cvv + F.ds * G.ds * cuv
            return float(space - time_side)
        return float(F.dss * cuu + G.dss * cvv - (F.dt + G.dt) * np.exp(F.value * G.value))
    if kind is Chart.PARABOLIC_UV:
        rho2 = 2.0 * np.hypot(p, q)
        space = F.dss * G.value + F.value * G.dss if product else F.dss + G.dss
        return float(rho2 * space - time_side)
    lx, ly = elliptic_laplacians(p, q, c)
    A, B, C = elliptic_coefficients(p, q)
    if product:
        space = (F.ds * G.value * lx + F.value * G.ds * ly + F.dss * G.value * A
                 + 2.0 * F.ds * G.ds * B + F.value * G.dss * C)
    else:
        space = F.ds * lx + G.ds * ly + F.dss * A + G.dss * C
    return float(time_side - space)
