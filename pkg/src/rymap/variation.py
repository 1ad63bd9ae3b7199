"""Residuals of the evolution identities satisfied along an RY flow.

Every identity compares a time-differenced left side with a right side
assembled from spatial finite differences.  Joint refinement ties the time
step to the spatial step (``dt = step`` unless given).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import geometry as geo
from .errors import NotRYFlowError, PositivityError, PreconditionError
from .geometry import DiffSpec, MetricField
from .ry import RYParams, ry_eval

__all__ = [
    "IdentityResidual",
    "RecurrenceForm",
    "LowerBoundReport",
    "observed_orders",
    "refine",
    "christoffel_variation_residual",
    "scalar_variation_residual",
    "volume_form_variation_residual",
    "constant_volume_scalar_residual",
    "curvature_lower_bound_check",
    "recurrent_eta",
    "recurrent_variation_residuals",
]


@dataclass
class IdentityResidual:
    identity_id: str
    lhs: np.ndarray
    rhs: np.ndarray
    residual_norm: float
    step_sequence: list = field(default_factory=list)
    report_only: bool = False

    @property
    def observed_order(self) -> Optional[float]:
        """Order from the two finest levels of ``step_sequence``."""
        orders = observed_orders(self.step_sequence)
        return orders[-1] if orders else None

    def to_dict(self) -> dict:
        return {
            "identity": self.identity_id,
            "lhs": np.asarray(self.lhs).tolist(),
            "rhs": np.asarray(self.rhs).tolist(),
            "residual_norm": self.residual_norm,
            "step_sequence": [[float(h), float(r)] for h, r in self.step_sequence],
            "observed_order": self.observed_order,
            "report_only": self.report_only,
        }


def _make(identity, lhs, rhs, spec, report_only):
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    norm = float(np.max(np.abs(lhs - rhs)))
    return IdentityResidual(identity, lhs, rhs, norm, [(spec.step, norm)], report_only)


def observed_orders(step_sequence: Sequence) -> list:
    out = []
    for (h1, r1), (h2, r2) in zip(step_sequence, step_sequence[1:]):
        if r1 > 0 and r2 > 0 and h1 != h2:
            out.append(math.log(r1 / r2) / math.log(h1 / h2))
        else:
            out.append(math.inf)
    return out


def refine(op: Callable[..., IdentityResidual], steps: Sequence[float], *args, base: DiffSpec = None,
           dt_ratio: float = 1.0, **kwargs) -> IdentityResidual:
    """Run ``op(*args, spec=..., dt=...)`` over ``steps`` (strictly decreasing).

    Returns the finest-level residual with the whole ladder in ``step_sequence``.
    """
    steps = [float(h) for h in steps]
    if any(b >= a for a, b in zip(steps, steps[1:])):
        raise ValueError("refinement steps must be strictly decreasing")
    base = base or geo.DEFAULT_SPEC
    ladder, last = [], None
    for h in steps:
        last = op(*args, spec=replace(base, step=h), dt=dt_ratio * h, **kwargs)
        ladder.append((h, last.residual_norm))
    last.step_sequence = ladder
    return last


def _require_ry_flow(flow, t, p, params, strict, tol):
    ry = ry_eval(flow, t, p, params)
    size = float(np.max(np.abs(ry)))
    scale = 1.0 + float(np.max(np.abs(flow(t, p))))
    if size <= tol * scale:
        return False
    if strict:
        raise NotRYFlowError(f"{flow.name} is not an RY flow for {params}: |RY| = {size:.3g}")
    return True


def _time(fn, t, spec, dt):
    return geo.time_derivative(fn, t, dt=dt, order=spec.order, richardson=spec.richardson)


def _ricci_jet(flow, t, p, spec):
    """Ricci tensor, scalar, and their first partials at ``p``."""
    n = flow.dim

    def packed(q):
        b = geo.curvature(flow, t, q, spec)
        return np.concatenate([b.ricci.ravel(), [b.scalar]])

    center = geo.curvature(flow, t, p, spec)
    d = geo._margin_guard(lambda: geo.gradient(packed, p, spec))
    d_ric = d[:, : n * n].reshape(n, n, n)
    d_scalar = d[:, -1]
    return center, d_ric, d_scalar


def _nabla(d_ric, gam, ric):
    return d_ric - np.einsum("mli,mj->lij", gam, ric) - np.einsum("mlj,im->lij", gam, ric)


def christoffel_variation_residual(flow: MetricField, t: float, p, params: RYParams,
                                   spec: Optional[DiffSpec] = None, dt: Optional[float] = None,
                                   strict: bool = True, ry_tol: float = 1e-6) -> IdentityResidual:
    """``d_t Gamma`` against the covariant-derivative expression of the Ricci and scalar curvature."""
    spec = spec or geo.DEFAULT_SPEC
    dt = spec.step if dt is None else dt
    p = geo.as_point(p)
    report_only = _require_ry_flow(flow, t, p, params, strict, ry_tol)
    n = flow.dim
    a, b = params.alpha, params.beta

    def sides(spec, dt):
        lhs = _time(lambda s: geo.christoffel(flow, s, p, spec), t, spec, dt)
        g = flow(t, p)
        ginv = np.linalg.inv(g)
        center, d_ric, d_scalar = _ricci_jet(flow, t, p, spec)
        nric = _nabla(d_ric, center.christoffel, center.ricci)
        term_a = (np.einsum("kl,lij->kij", ginv, nric) - np.einsum("kl,ijl->kij", ginv, nric)
                  - np.einsum("kl,jil->kij", ginv, nric))
        eye = np.eye(n)
        term_b = (np.einsum("i,kj->kij", d_scalar, eye) + np.einsum("j,ki->kij", d_scalar, eye)
                  - np.einsum("k,ij->kij", ginv @ d_scalar, g))
        return lhs, a * term_a - 0.5 * b * term_b

    lhs, rhs = sides(spec, dt)
    return _make("christoffel_variation", lhs, rhs, spec, report_only)


def _scalar_field(flow, t, spec):
    return lambda q: geo.curvature(flow, t, q, spec).scalar


def scalar_variation_residual(flow: MetricField, t: float, p, params: RYParams,
                              spec: Optional[DiffSpec] = None, dt: Optional[float] = None,
                              strict: bool = True, ry_tol: float = 1e-6) -> IdentityResidual:
    """``d_t R`` against ``[a + (n-1) b] Lap R + 2a |Ric|^2 + b R^2``.

    In two dimensions the two surface forms (in ``R`` and in ``K``) are appended
    as second and third components of ``lhs``/``rhs``.
    """
    spec = spec or geo.DEFAULT_SPEC
    dt = spec.step if dt is None else dt
    p = geo.as_point(p)
    report_only = _require_ry_flow(flow, t, p, params, strict, ry_tol)
    n = flow.dim
    a, b = params.alpha, params.beta

    def sides(spec, dt):
        dR = float(_time(lambda s: geo.curvature(flow, s, p, spec).scalar, t, spec, dt))
        bundle = geo.curvature(flow, t, p, spec)
        R = bundle.scalar
        lapR = geo.laplace_beltrami(_scalar_field(flow, t, spec), flow, t, p, spec)
        ric_sq = geo.ricci_norm_sq(bundle.ricci, flow(t, p))
        lhs = [dR]
        rhs = [(a + (n - 1) * b) * lapR + 2.0 * a * ric_sq + b * R**2]
        if n == 2:
            dK = float(_time(lambda s: geo.curvature(flow, s, p, spec).gauss, t, spec, dt))
            K = bundle.gauss
            lapK = geo.laplace_beltrami(lambda q: geo.curvature(flow, t, q, spec).gauss, flow, t, p, spec)
            lhs += [dR, dK]
            rhs += [params.sum * (lapR + R**2), params.sum * (lapK + 2.0 * K**2)]
        return lhs, rhs

    lhs, rhs = sides(spec, dt)
    return _make("scalar_variation", lhs, rhs, spec, report_only)


def volume_form_variation_residual(flow: MetricField, t: float, p, params: RYParams,
                                   spec: Optional[DiffSpec] = None, dt: Optional[float] = None,
                                   strict: bool = True, ry_tol: float = 1e-6) -> IdentityResidual:
    """``d_t sqrt(det g)`` against ``-(a + n b / 2) R sqrt(det g)``."""
    spec = spec or geo.DEFAULT_SPEC
    dt = spec.step if dt is None else dt
    p = geo.as_point(p)
    report_only = _require_ry_flow(flow, t, p, params, strict, ry_tol)
    n = flow.dim
    def sides(spec, dt):
        lhs = float(_time(lambda s: geo.volume_form(flow, s, p), t, spec, dt))
        R = geo.curvature(flow, t, p, spec).scalar
        return [lhs], [-(params.alpha + 0.5 * n * params.beta) * R * geo.volume_form(flow, t, p)]

    lhs, rhs = sides(spec, dt)
    return _make("volume_form_variation", lhs, rhs, spec, report_only)


def constant_volume_scalar_residual(flow: MetricField, t: float, p, params: RYParams,
                                    spec: Optional[DiffSpec] = None, dt: Optional[float] = None,
                                    strict: bool = True, ry_tol: float = 1e-6) -> IdentityResidual:
    """Scalar-curvature evolution in the volume-preserving case ``2a + n b = 0``, ``a != 0``."""
    spec = spec or geo.DEFAULT_SPEC
    dt = spec.step if dt is None else dt
    p = geo.as_point(p)
    n = flow.dim
    if abs(params.mix(n)) > 1e-12 * (1.0 + abs(params.alpha)) or params.alpha == 0.0:
        raise PreconditionError(f"needs 2 alpha + n beta = 0 and alpha != 0, got {params} with n={n}")
    report_only = _require_ry_flow(flow, t, p, params, strict, ry_tol)
    def sides(spec, dt):
        dR = float(_time(lambda s: geo.curvature(flow, s, p, spec).scalar, t, spec, dt))
        bundle = geo.curvature(flow, t, p, spec)
        R = bundle.scalar
        rhs = 2.0 * geo.ricci_norm_sq(bundle.ricci, flow(t, p)) - (2.0 / n) * R**2
        if n != 2:
            rhs += (2.0 - n) / n * geo.laplace_beltrami(_scalar_field(flow, t, spec), flow, t, p, spec)
        return [dR / params.alpha], [rhs]

    lhs, rhs = sides(spec, dt)
    return _make("constant_volume_scalar", lhs, rhs, spec, report_only)


# ---------------------------------------------------------------------------
# curvature lower bound on solver output


@dataclass
class LowerBoundReport:
    rows: list
    passed: bool
    safety: float

    def to_dict(self) -> dict:
        return {
            "safety": self.safety,
            "passed": self.passed,
            "rows": [dict(zip(("t", "min_K", "bound", "truncation", "ok"), r)) for r in self.rows],
        }


def curvature_lower_bound_check(trajectory, params: RYParams, times: Optional[Sequence[float]] = None,
                                safety: float = 10.0) -> LowerBoundReport:
    """Check ``min K(t) >= -1 / (2 (a + b) t) - safety * truncation`` on periodic snapshots.

    The truncation estimate at each time is the largest gap between the
    second- and fourth-order discrete curvature of the snapshot.
    """
    from .pde.solver import BC, gauss_curvature_grid

    if params.sum < 1.0:
        raise PreconditionError(f"the bound is stated for alpha + beta >= 1, got {params.sum}")
    snapshots = list(getattr(trajectory, "snapshots", trajectory))
    rows, passed = [], True
    for state in snapshots:
        if state.bc.kind is not BC.PERIODIC:
            raise PreconditionError("the lower bound holds on closed surfaces; use a periodic grid")
        if state.t <= 0:
            continue
        if times is not None and not any(abs(state.t - s) <= 1e-12 * max(1.0, abs(s)) for s in times):
            continue
        K2 = gauss_curvature_grid(state, order=2)
        K4 = gauss_curvature_grid(state, order=4)
        trunc = float(np.max(np.abs(K2 - K4)))
        kmin = float(np.min(K2))
        bound = -1.0 / (2.0 * params.sum * state.t)
        ok = kmin >= bound - safety * trunc
        passed &= ok
        rows.append((state.t, kmin, bound, trunc, bool(ok)))
    return LowerBoundReport(rows, bool(passed), safety)


# ---------------------------------------------------------------------------
# Ricci-recurrent flows


@dataclass
class RecurrenceForm:
    eta: np.ndarray
    source: str
    recurrence_residual: float


def _log_gauss(flow, t, spec):
    def fn(q):
        K = geo.curvature(flow, t, q, spec).gauss
        if not K > 0:
            raise PositivityError(f"Gaussian curvature {K} <= 0 at {np.asarray(q).tolist()}")
        return math.log(K)
    return fn


def _check_surface(flow):
    if flow.dim != 2:
        raise PreconditionError("eta = d ln K is a surface construction; the flow must be 2-D")


def recurrent_eta(flow: MetricField, t: float, p, spec: Optional[DiffSpec] = None) -> RecurrenceForm:
    """``eta = d ln K`` and the residual ``max |nabla_l Ric_ij - eta_l Ric_ij|``."""
    spec = spec or geo.DEFAULT_SPEC
    _check_surface(flow)
    p = geo.as_point(p)
    eta = geo.gradient(_log_gauss(flow, t, spec), p, spec)
    center, d_ric, _ = _ricci_jet(flow, t, p, spec)
    nric = _nabla(d_ric, center.christoffel, center.ricci)
    resid = float(np.max(np.abs(nric - np.einsum("l,ij->lij", eta, center.ricci))))
    return RecurrenceForm(eta, "derived", resid)


def recurrent_variation_residuals(flow: MetricField, t: float, p, params: RYParams,
                                  spec: Optional[DiffSpec] = None, dt: Optional[float] = None,
                                  eta: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                                  strict: bool = True, ry_tol: float = 1e-6,
                                  recurrence_tol: float = 1e-5):
    """Christoffel and curvature evolution under Ricci recurrence.

    Returns ``(christoffel_residual, curvature_residual)``.  The second compares
    ``d_t R`` and ``d_t K`` with their recurrent forms.  ``eta`` defaults to
    ``d ln K``, which requires ``K > 0``.
    """
    spec = spec or geo.DEFAULT_SPEC
    dt = spec.step if dt is None else dt
    p = geo.as_point(p)
    _check_surface(flow)
    report_only = _require_ry_flow(flow, t, p, params, strict, ry_tol)
    a, b = params.alpha, params.beta

    if eta is None:
        log_k = _log_gauss(flow, t, spec)
        eta = lambda q: geo.gradient(log_k, q, spec)  # noqa: E731
        source = "derived"
    else:
        source = "supplied"
    eta_p = np.asarray(eta(p), dtype=float)

    center, d_ric, _ = _ricci_jet(flow, t, p, spec)
    nric = _nabla(d_ric, center.christoffel, center.ricci)
    rec = float(np.max(np.abs(nric - np.einsum("l,ij->lij", eta_p, center.ricci))))
    if rec > recurrence_tol * (1.0 + float(np.max(np.abs(center.ricci)))):
        if strict:
            raise PreconditionError(f"flow is not Ricci-recurrent for the {source} eta: residual {rec:.3g}")
        report_only = True

    g = flow(t, p)
    ginv = np.linalg.inv(g)
    ric, R = center.ricci, center.scalar
    eta_up = ginv @ eta_p
    ric_mixed = ginv @ ric  # R^k_j
    eye = np.eye(2)
    rhs_gamma = (a * (np.einsum("k,ij->kij", eta_up, ric) - np.einsum("i,kj->kij", eta_p, ric_mixed)
                      - np.einsum("j,ki->kij", eta_p, ric_mixed))
                 - 0.5 * b * R * (np.einsum("i,kj->kij", eta_p, eye) + np.einsum("j,ki->kij", eta_p, eye)
                                  - np.einsum("ij,k->kij", g, eta_up)))
    lhs_gamma = _time(lambda s: geo.christoffel(flow, s, p, spec), t, spec, dt)
    gamma_res = _make("recurrent_christoffel_variation", lhs_gamma, rhs_gamma, spec, report_only)

    eta_sq = float(eta_p @ eta_up)
    div_eta = geo.divergence(lambda q: np.linalg.inv(flow(t, q)) @ np.asarray(eta(q), dtype=float),
                             flow, t, p, spec)
    K = center.gauss
    dR = float(_time(lambda s: geo.curvature(flow, s, p, spec).scalar, t, spec, dt))
    dK = float(_time(lambda s: geo.curvature(flow, s, p, spec).gauss, t, spec, dt))
    rhs_R = params.sum * ((div_eta + eta_sq) * R + R**2)
    rhs_K = params.sum * ((div_eta + eta_sq) * K + 2.0 * K**2)
    curv_res = _make("recurrent_curvature_variation", [dR, dK], [rhs_R, rhs_K], spec, report_only)
    return gamma_res, curv_res
