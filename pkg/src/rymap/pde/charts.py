"""Coordinate charts of the plane and resampling of grid states between them."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy import ndimage

from ..errors import EvaluationDomainError
from .solver import BC, BoundaryCondition, Chart, ConformalGridState

__all__ = ["ChartMap", "chart_map", "elliptic_forward", "chart_transfer"]

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class ChartMap:
    """``forward: (a, b) -> (x, y)`` into the Cartesian plane, with optional inverse."""

    chart: Chart
    forward: Callable
    inverse: Optional[Callable]
    jacobian: Callable
    in_domain: Callable

    def is_regular(self, a, b) -> np.ndarray:
        """True where the point lies in the declared domain and the jacobian is invertible."""
        J = self.jacobian(a, b)
        det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
        return np.asarray(self.in_domain(a, b)) & (np.abs(det) > SINGULAR_TOL)


def _polar_forward(x, y):
    return x * np.cos(y), x * np.sin(y)


def _polar_inverse(X, Y):
    return np.hypot(X, Y), np.arctan2(Y, X)


def _polar_jacobian(x, y):
    c, s = np.cos(y), np.sin(y)
    return ((c, -x * s), (s, x * c))


def _parabolic_forward(u, v):
    return 0.5 * (u**2 - v**2), u * v


def _parabolic_inverse(X, Y):
    # principal square root of 2 (X + iY); u >= 0 branch
    z = np.sqrt(2.0 * (np.asarray(X) + 1j * np.asarray(Y)))
    return z.real, z.imag


def _parabolic_jacobian(u, v):
    return ((u, -v), (v, u))


def elliptic_forward(u, v, c: float = 1.0):
    """``x = c sqrt((u-1)(v-1))``, ``y = c sqrt(-uv)`` on ``u < 0 < v < 1`` (and mirrored sign patterns)."""
    return c * np.sqrt((u - 1.0) * (v - 1.0)), c * np.sqrt(-u * v)


def _elliptic(c):
    def inverse(X, Y):
        p = -(np.asarray(Y) / c) ** 2
        s = 1.0 - (np.asarray(X) ** 2 + np.asarray(Y) ** 2) / c**2
        disc = np.sqrt(s**2 - 4.0 * p)
        return 0.5 * (s - disc), 0.5 * (s + disc)

    def jacobian(u, v):
        x, y = elliptic_forward(u, v, c)
        return ((0.5 * c**2 * (v - 1.0) / x, 0.5 * c**2 * (u - 1.0) / x),
                (-0.5 * c**2 * v / y, -0.5 * c**2 * u / y))

    def in_domain(u, v):
        u, v = np.asarray(u), np.asarray(v)
        return ((u - 1.0) * (v - 1.0) > 0) & (u * v < 0) & (u != 0) & (v != 0) & (u != 1) & (v != 1)

    return ChartMap(Chart.ELLIPTIC_UV, lambda u, v: elliptic_forward(u, v, c), inverse, jacobian, in_domain)


def chart_map(chart: Chart, c: float = 1.0) -> ChartMap:
    if chart is Chart.CARTESIAN:
        one = lambda a, b: np.ones_like(np.asarray(a, dtype=float))
        zero = lambda a, b: np.zeros_like(np.asarray(a, dtype=float))
        return ChartMap(chart, lambda a, b: (a, b), lambda X, Y: (X, Y),
                        lambda a, b: ((one(a, b), zero(a, b)), (zero(a, b), one(a, b))),
                        lambda a, b: np.ones_like(np.asarray(a), dtype=bool))
    if chart is Chart.POLAR:
        return ChartMap(chart, _polar_forward, _polar_inverse, _polar_jacobian,
                        lambda x, y: np.asarray(x) != 0)
    if chart is Chart.PARABOLIC_UV:
        return ChartMap(chart, _parabolic_forward, _parabolic_inverse, _parabolic_jacobian,
                        lambda u, v: (np.asarray(u) != 0) | (np.asarray(v) != 0))
    return _elliptic(c)


def _resample(state, idx, order):
    mode = "grid-wrap" if state.bc.kind is BC.PERIODIC else "nearest"
    return ndimage.map_coordinates(state.h, idx, order=order, mode=mode)


def chart_transfer(state: ConformalGridState, target: Chart, origin, spacing, shape,
                   order: int = 3, c: float = 1.0) -> ConformalGridState:
    """Resample ``state.h`` onto a grid in the ``target`` chart.

    Nodes that coincide with source nodes are copied exactly.  The maximum
    gap between order ``order`` and order ``order - 1`` interpolants is stored
    as ``meta["interpolation_error_estimate"]``.  Target points outside the
    source grid raise :class:`EvaluationDomainError` unless the source is
    periodic.  The result carries a frozen Dirichlet boundary unless both
    charts coincide.  Only the scalar ``h`` is resampled: converting the
    conformal exponent between charts (adding the log of the background
    factor) is left to the caller.
    """
    if order < 1 or order > 5:
        raise ValueError("interpolation order must be in 1..5")
    tgt = chart_map(target, c)
    src = chart_map(state.chart, c)
    a = origin[0] + spacing[0] * np.arange(shape[0])
    b = origin[1] + spacing[1] * np.arange(shape[1])
    A, B = np.meshgrid(a, b, indexing="ij")
    if not np.all(tgt.is_regular(A, B)):
        raise EvaluationDomainError(f"target grid touches a degenerate line of the {target.value} chart")
    X, Y = tgt.forward(A, B)
    sa, sb = src.inverse(X, Y)
    idx = np.stack([(sa - state.origin[0]) / state.spacing[0], (sb - state.origin[1]) / state.spacing[1]])
    if state.bc.kind is not BC.PERIODIC:
        hi = np.array(state.h.shape)[:, None, None] - 1
        tol = 1e-9
        outside = np.any((idx < -tol) | (idx > hi + tol), axis=0)
        if np.any(outside):
            k = int(np.argmax(outside.ravel()))
            raise EvaluationDomainError(
                f"{int(outside.sum())} target points are not covered by the source grid "
                f"(first at {target.value} ({A.ravel()[k]:.6g}, {B.ravel()[k]:.6g}))")
        idx = np.clip(idx, 0, hi)
    h = _resample(state, idx, order)
    coarse = _resample(state, idx, max(order - 1, 1) if order > 1 else 0)
    rounded = np.rint(idx)
    coincident = np.all(np.abs(idx - rounded) < 1e-9, axis=0)
    if state.bc.kind is BC.PERIODIC:
        rounded = np.mod(rounded, np.array(state.h.shape)[:, None, None])
    ri = rounded.astype(int)
    h[coincident] = state.h[ri[0][coincident], ri[1][coincident]]
    estimate = float(np.max(np.abs(h - coarse)[~coincident])) if np.any(~coincident) else 0.0
    bc = state.bc if target is state.chart else BoundaryCondition.dirichlet()
    meta = dict(state.meta)
    meta.update(interpolation_error_estimate=estimate, interpolation_order=order, source_chart=state.chart.value)
    return replace(state, chart=target, h=h, spacing=tuple(spacing), origin=tuple(origin), bc=bc, meta=meta)
