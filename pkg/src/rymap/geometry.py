"""Pointwise differential geometry of coordinate metrics by finite differences.

Everything here works on a :class:`MetricField`, a time-dependent symmetric
matrix field given in one chart.  Derivatives are central differences,
nested for second derivatives, with optional Richardson extrapolation.

Conventions
-----------
``christoffel[k, i, j]`` is the Levi-Civita symbol with upper index ``k``.
``riemann[l, i, j, k]`` is the component along ``d_l`` of
``R(d_i, d_j) d_k = nabla_i nabla_j d_k - nabla_j nabla_i d_k``, and the Ricci
tensor is ``Ric_jk = riemann[l, l, j, k]``.  With these choices the
hyperbolic half-plane has scalar curvature -2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    DegenerateMetricError,
    DomainMarginError,
    EvaluationDomainError,
    PositivityError,
)

__all__ = [
    "DiffSpec",
    "MetricField",
    "CurvatureBundle",
    "as_point",
    "derivative",
    "gradient",
    "time_derivative",
    "metric_partials",
    "christoffel",
    "curvature",
    "gauss_isothermal",
    "laplace_beltrami",
    "divergence",
    "volume_form",
    "covariant_derivative_sym2",
    "ricci_norm_sq",
    "second_derivative",
]


@dataclass(frozen=True)
class DiffSpec:
    """Finite-difference settings: spacing, base accuracy order, Richardson flag."""

    step: float = 1e-3
    order: int = 2
    richardson: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.step) and self.step > 0):
            raise ValueError(f"step must be positive and finite, got {self.step!r}")
        if self.order not in (2, 4):
            raise ValueError(f"order must be 2 or 4, got {self.order!r}")

    @property
    def radius(self) -> float:
        """Reach of a single stencil in units of coordinate distance."""
        return self.step * (1 if self.order == 2 else 2)

    @property
    def effective_order(self) -> int:
        return self.order + 2 if self.richardson else self.order

    def scaled(self, factor: float) -> "DiffSpec":
        return DiffSpec(self.step * factor, self.order, self.richardson)


DEFAULT_SPEC = DiffSpec()


def as_point(p) -> np.ndarray:
    q = np.atleast_1d(np.asarray(p, dtype=float))
    if q.ndim != 1 or q.size < 1:
        raise ValueError("a point is a 1-D array of at least one coordinate")
    if not np.all(np.isfinite(q)):
        raise EvaluationDomainError(f"non-finite coordinates {q}")
    return q


@dataclass(frozen=True)
class CurvatureBundle:
    christoffel: np.ndarray
    ricci: np.ndarray
    scalar: float
    gauss: Optional[float] = None
    riemann: Optional[np.ndarray] = None


@dataclass(frozen=True)
class MetricField:
    """A time-dependent Riemannian metric in a single chart.

    Parameters
    ----------
    dim : int
        Manifold dimension.
    func : callable ``(t, p) -> (dim, dim) array``
        The metric components.
    exact_dt : callable, optional
        Exact time derivative of the components.
    exact_curvature : callable ``(t, p) -> CurvatureBundle``, optional
        Closed-form curvature, used by callers that ask for it.
    domain : callable ``(t, p) -> bool``, optional
        Membership test; evaluations outside raise ``EvaluationDomainError``.
    name : str
        Label used in reports.
    """

    dim: int
    func: Callable[[float, np.ndarray], np.ndarray]
    exact_dt: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    exact_curvature: Optional[Callable[[float, np.ndarray], CurvatureBundle]] = None
    domain: Optional[Callable[[float, np.ndarray], bool]] = None
    name: str = "metric"

    def contains(self, t: float, p) -> bool:
        return self.domain is None or bool(self.domain(t, np.asarray(p, dtype=float)))

    def _check(self, t, p):
        if not self.contains(t, p):
            raise EvaluationDomainError(f"{self.name}: ({t}, {np.asarray(p).tolist()}) is outside the domain")

    def _matrix(self, fn, t, p):
        p = as_point(p)
        if p.size != self.dim:
            raise ValueError(f"{self.name}: expected a point of dimension {self.dim}, got {p.size}")
        self._check(t, p)
        g = np.asarray(fn(t, p), dtype=float)
        if g.shape != (self.dim, self.dim):
            raise EvaluationDomainError(f"{self.name}: component array has shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise EvaluationDomainError(f"{self.name}: non-finite components at t={t}, p={p.tolist()}")
        return 0.5 * (g + g.T)

    def __call__(self, t: float, p) -> np.ndarray:
        return self._matrix(self.func, t, p)

    def dt(self, t: float, p) -> Optional[np.ndarray]:
        """Exact time derivative if one is attached, else ``None``."""
        if self.exact_dt is None:
            return None
        return self._matrix(self.exact_dt, t, p)

    def at(self, t: float) -> Callable[[np.ndarray], np.ndarray]:
        """Freeze time: returns ``p -> g(t, p)``."""
        return lambda p: self(t, p)


# ---------------------------------------------------------------------------
# finite differences


def _central(fn, x, e, h, order):
    if order == 2:
        return (fn(x + h * e) - fn(x - h * e)) / (2.0 * h)
    return (8.0 * (fn(x + h * e) - fn(x - h * e)) - (fn(x + 2 * h * e) - fn(x - 2 * h * e))) / (12.0 * h)


def _extrapolated(fn, x, e, spec: DiffSpec):
    d = _central(fn, x, e, spec.step, spec.order)
    if not spec.richardson:
        return d
    d_half = _central(fn, x, e, spec.step / 2.0, spec.order)
    w = 2.0 ** spec.order
    return (w * d_half - d) / (w - 1.0)


def derivative(fn: Callable, p, axis: int, spec: DiffSpec = DEFAULT_SPEC):
    """Partial derivative of ``fn`` (scalar or array valued) along ``axis`` at ``p``."""
    p = as_point(p)
    e = np.zeros_like(p)
    e[axis] = 1.0
    return _extrapolated(lambda q: np.asarray(fn(q), dtype=float), p, e, spec)


def gradient(fn: Callable, p, spec: DiffSpec = DEFAULT_SPEC) -> np.ndarray:
    """All partials of ``fn``; the derivative index comes first."""
    p = as_point(p)
    return np.stack([derivative(fn, p, k, spec) for k in range(p.size)])


def time_derivative(fn: Callable[[float], np.ndarray], t: float, dt: float = 1e-4, order: int = 4,
                    richardson: bool = False):
    """Central difference in the scalar argument of ``fn``."""
    spec = DiffSpec(dt, order, richardson)
    one = np.ones(1)
    return _extrapolated(lambda s: np.asarray(fn(float(s[0])), dtype=float), np.array([float(t)]), one, spec)


def _margin_guard(call):
    """Re-raise a domain failure at a stencil node as a margin error."""
    try:
        return call()
    except DomainMarginError:
        raise
    except EvaluationDomainError as exc:
        raise DomainMarginError(f"finite-difference stencil leaves the domain: {exc}") from exc


def _inverse(g: np.ndarray) -> np.ndarray:
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetricError(f"metric is not positive definite: eigenvalues {np.linalg.eigvalsh(g)}") from exc
    ginv = np.linalg.inv(g)
    return 0.5 * (ginv + ginv.T)


# ---------------------------------------------------------------------------
# connection and curvature


def metric_partials(field: MetricField, t: float, p, spec: DiffSpec = DEFAULT_SPEC) -> np.ndarray:
    """``dg[k, i, j] = d_k g_ij`` at ``(t, p)``."""
    p = as_point(p)
    field(t, p)
    dg = _margin_guard(lambda: gradient(field.at(t), p, spec))
    return 0.5 * (dg + dg.transpose(0, 2, 1))


def _christoffel_from(ginv, dg):
    # lower[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    lower = np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    gam = 0.5 * np.einsum("kl,lij->kij", ginv, lower)
    return 0.5 * (gam + gam.transpose(0, 2, 1))


def christoffel(field: MetricField, t: float, p, spec: DiffSpec = DEFAULT_SPEC) -> np.ndarray:
    p = as_point(p)
    ginv = _inverse(field(t, p))
    return _christoffel_from(ginv, metric_partials(field, t, p, spec))


def _riemann(gam, dgam):
    # dgam[i, l, j, k] = d_i Gamma^l_jk
    term = np.einsum("iljk->lijk", dgam)
    quad = np.einsum("lim,mjk->lijk", gam, gam)
    riem = term - term.transpose(0, 2, 1, 3) + quad - quad.transpose(0, 2, 1, 3)
    return riem


def curvature(field: MetricField, t: float, p, spec: DiffSpec = DEFAULT_SPEC) -> CurvatureBundle:
    """Christoffel symbols, Riemann, Ricci and scalar curvature by nested differences."""
    p = as_point(p)
    g = field(t, p)
    ginv = _inverse(g)
    gam = christoffel(field, t, p, spec)
    dgam = _margin_guard(lambda: gradient(lambda q: christoffel(field, t, q, spec), p, spec))
    riem = _riemann(gam, dgam)
    ric = np.einsum("lljk->jk", riem)
    ric = 0.5 * (ric + ric.T)
    scalar = float(np.einsum("ij,ij->", ginv, ric))
    gauss = 0.5 * scalar if field.dim == 2 else None
    return CurvatureBundle(christoffel=gam, ricci=ric, scalar=scalar, gauss=gauss, riemann=riem)


def ricci_norm_sq(ricci: np.ndarray, g: np.ndarray) -> float:
    """``g^ik g^jl Ric_ij Ric_kl``."""
    ginv = _inverse(g)
    return float(np.einsum("ik,jl,ij,kl->", ginv, ginv, ricci, ricci))


def gauss_isothermal(lam: Callable[[np.ndarray], float], p, spec: DiffSpec = DEFAULT_SPEC) -> float:
    """Gaussian curvature of ``lam(u, v) (du^2 + dv^2)``: ``-(1/2 lam) * flat Laplacian of ln lam``."""
    p = as_point(p)
    if p.size != 2:
        raise ValueError("isothermal curvature needs a 2-D point")

    def log_lam(q):
        val = float(lam(q))
        if not val > 0:
            raise PositivityError(f"conformal factor {val} <= 0 at {np.asarray(q).tolist()}")
        return np.log(val)

    center = float(lam(p))
    if not center > 0:
        raise PositivityError(f"conformal factor {center} <= 0 at {p.tolist()}")
    lap = sum(second_derivative(log_lam, p, k, spec) for k in range(2))
    return -lap / (2.0 * center)


def second_derivative(fn, p, axis, spec):
    e = np.zeros_like(p)
    e[axis] = 1.0
    f0 = fn(p)

    def d2(h):
        if spec.order == 2:
            return (fn(p + h * e) - 2.0 * f0 + fn(p - h * e)) / h**2
        return (-fn(p + 2 * h * e) + 16.0 * fn(p + h * e) - 30.0 * f0 + 16.0 * fn(p - h * e)
                - fn(p - 2 * h * e)) / (12.0 * h**2)

    d = d2(spec.step)
    if not spec.richardson:
        return d
    w = 2.0 ** spec.order
    return (w * d2(spec.step / 2.0) - d) / (w - 1.0)


def divergence(flux: Callable[[np.ndarray], np.ndarray], field: MetricField, t: float, p,
               spec: DiffSpec = DEFAULT_SPEC) -> float:
    """Divergence of the vector field ``X^i = flux(q)`` w.r.t. the Riemannian volume."""
    p = as_point(p)

    def density(q):
        return volume_form(field, t, q) * np.asarray(flux(q), dtype=float)

    total = 0.0
    for i in range(p.size):
        total += float(_margin_guard(lambda: derivative(lambda q: density(q)[i], p, i, spec)))
    return total / volume_form(field, t, p)


def laplace_beltrami(f: Callable[[np.ndarray], float], field: MetricField, t: float, p,
                     spec: DiffSpec = DEFAULT_SPEC) -> float:
    """``(1/sqrt det g) d_i (sqrt det g g^ij d_j f)``."""
    p = as_point(p)
    _inverse(field(t, p))

    def grad_up(q):
        ginv = _inverse(field(t, q))
        return ginv @ gradient(lambda s: float(f(s)), q, spec)

    return divergence(grad_up, field, t, p, spec)


def volume_form(field: MetricField, t: float, p) -> float:
    det = float(np.linalg.det(field(t, p)))
    if not det > 0:
        raise DegenerateMetricError(f"metric determinant {det} <= 0")
    return float(np.sqrt(det))


def covariant_derivative_sym2(T: Callable[[np.ndarray], np.ndarray], field: MetricField, t: float, p,
                              spec: DiffSpec = DEFAULT_SPEC) -> np.ndarray:
    """``out[l, i, j] = nabla_l T_ij`` for a covariant symmetric 2-tensor field ``T(q)``."""
    p = as_point(p)
    gam = christoffel(field, t, p, spec)
    dT = _margin_guard(lambda: gradient(lambda q: np.asarray(T(q), dtype=float), p, spec))
    Tp = np.asarray(T(p), dtype=float)
    return dT - np.einsum("mli,mj->lij", gam, Tp) - np.einsum("mlj,im->lij", gam, Tp)
