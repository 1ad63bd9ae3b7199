"""Time stepping of the conformal RY flow ``(e^h)_t = (a + b) Lap h`` on 2-D grids.

The metric is ``e^h w (da^2 + db^2)`` where ``w`` is the flat background
factor of the chart (1 for Cartesian, ``u^2 + v^2`` for parabolic ``(u, v)``).
The update is written as ``h_t = (a + b) e^(-h) Lap h / w``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse import linalg as splinalg

from ..errors import BlowUpError, CFLViolation, EvaluationDomainError, PreconditionError
from ..ry import RYParams

__all__ = [
    "Chart",
    "BC",
    "BoundaryCondition",
    "ConformalGridState",
    "Scheme",
    "SolverConfig",
    "Trajectory",
    "grid_laplacian",
    "gauss_curvature_grid",
    "stable_dt",
    "step",
    "step_cartesian",
    "step_liouville",
    "run_flow",
    "sample",
]

log = logging.getLogger(__name__)

BLOWUP_LIMIT = 700.0


class Chart(enum.Enum):
    CARTESIAN = "Cartesian"
    POLAR = "Polar"
    PARABOLIC_UV = "ParabolicUV"
    ELLIPTIC_UV = "EllipticUV"


class BC(enum.Enum):
    PERIODIC = "Periodic"
    DIRICHLET = "Dirichlet"


@dataclass(frozen=True)
class BoundaryCondition:
    """Periodic, or Dirichlet with ``values(t, A, B)``; ``values=None`` freezes the boundary."""

    kind: BC
    values: Optional[Callable[[float, np.ndarray, np.ndarray], np.ndarray]] = None

    @classmethod
    def periodic(cls) -> "BoundaryCondition":
        return cls(BC.PERIODIC)

    @classmethod
    def dirichlet(cls, values=None) -> "BoundaryCondition":
        return cls(BC.DIRICHLET, values)


@dataclass(frozen=True)
class ConformalGridState:
    chart: Chart
    h: np.ndarray
    spacing: tuple
    origin: tuple
    t: float = 0.0
    bc: BoundaryCondition = field(default_factory=BoundaryCondition.periodic)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        if h.ndim != 2 or min(h.shape) < 5:
            raise ValueError(f"grid must be 2-D with at least 5 nodes per direction, got shape {h.shape}")
        if len(self.spacing) != 2 or min(self.spacing) <= 0:
            raise ValueError(f"spacing must be two positive numbers, got {self.spacing}")
        if not np.all(np.isfinite(h)):
            raise EvaluationDomainError("conformal exponent has non-finite entries")

    @property
    def shape(self):
        return self.h.shape

    def axes(self):
        return tuple(o + d * np.arange(n) for o, d, n in zip(self.origin, self.spacing, self.h.shape))

    def coords(self):
        """Nodal chart coordinates ``(A, B)`` with ``indexing='ij'``."""
        a, b = self.axes()
        return np.meshgrid(a, b, indexing="ij")

    def weight(self) -> np.ndarray:
        """Flat background factor of the chart."""
        if self.chart is Chart.CARTESIAN:
            return np.ones_like(self.h)
        if self.chart is Chart.PARABOLIC_UV:
            A, B = self.coords()
            return A**2 + B**2
        raise PreconditionError(f"no conformal grid form for chart {self.chart.value}")

    def with_h(self, h, t) -> "ConformalGridState":
        return replace(self, h=h, t=float(t), meta=dict(self.meta))


class Scheme(enum.Enum):
    EXPLICIT_EULER = "ExplicitEuler"
    RK4 = "RK4"
    SEMI_IMPLICIT = "SemiImplicit"


@dataclass(frozen=True)
class SolverConfig:
    params: RYParams
    dt: float
    steps: int
    scheme: Scheme = Scheme.RK4
    cfl_guard: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if int(self.steps) != self.steps or self.steps < 0:
            raise ValueError(f"steps must be a non-negative integer, got {self.steps}")


# ---------------------------------------------------------------------------
# discrete operators


def _d2(h, axis, d, periodic, order):
    if periodic:
        r1 = np.roll(h, -1, axis) + np.roll(h, 1, axis)
        if order == 2:
            return (r1 - 2.0 * h) / d**2
        r2 = np.roll(h, -2, axis) + np.roll(h, 2, axis)
        return (16.0 * r1 - r2 - 30.0 * h) / (12.0 * d**2)
    out = np.full_like(h, np.nan)
    sl = [slice(None)] * 2

    def take(lo, hi):
        s = list(sl)
        s[axis] = slice(lo, hi)
        return h[tuple(s)]

    n = h.shape[axis]
    inner = [slice(None)] * 2
    inner[axis] = slice(1, n - 1)
    out[tuple(inner)] = (take(2, n) + take(0, n - 2) - 2.0 * take(1, n - 1)) / d**2
    if order == 4:
        deep = [slice(None)] * 2
        deep[axis] = slice(2, n - 2)
        out[tuple(deep)] = (16.0 * (take(3, n - 1) + take(1, n - 3)) - (take(4, n) + take(0, n - 4))
                            - 30.0 * take(2, n - 2)) / (12.0 * d**2)
    return out


def grid_laplacian(h: np.ndarray, spacing, periodic: bool, order: int = 2) -> np.ndarray:
    """Flat Laplacian; NaN on Dirichlet boundary nodes."""
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    lap = _d2(h, 0, spacing[0], periodic, order) + _d2(h, 1, spacing[1], periodic, order)
    if not periodic:
        lap[0, :] = lap[-1, :] = lap[:, 0] = lap[:, -1] = np.nan
    return lap


def gauss_curvature_grid(state: ConformalGridState, order: int = 2) -> np.ndarray:
    """``K = -e^(-h) Lap h / (2 w)`` on every node (NaN on Dirichlet boundaries)."""
    periodic = state.bc.kind is BC.PERIODIC
    lap = grid_laplacian(state.h, state.spacing, periodic, order)
    return -0.5 * np.exp(-state.h) * lap / state.weight()


def stable_dt(state: ConformalGridState, params: RYParams) -> float:
    """Largest explicit step allowed by the diffusive bound."""
    c = abs(params.sum)
    if c == 0.0:
        return np.inf
    with np.errstate(over="ignore"):
        floor = float(np.min(np.exp(state.h) * state.weight()))
    return 0.25 * min(state.spacing) ** 2 * floor / c


def _rhs(h, state, params, weight):
    periodic = state.bc.kind is BC.PERIODIC
    out = params.sum * np.exp(-h) * grid_laplacian(h, state.spacing, periodic) / weight
    if not periodic:
        out[0, :] = out[-1, :] = out[:, 0] = out[:, -1] = 0.0
    return out


def _impose(h, state, t):
    if state.bc.kind is BC.PERIODIC or state.bc.values is None:
        return h
    A, B = state.coords()
    vals = np.asarray(state.bc.values(t, A, B), dtype=float)
    h = h.copy()
    h[0, :], h[-1, :], h[:, 0], h[:, -1] = vals[0, :], vals[-1, :], vals[:, 0], vals[:, -1]
    return h


def _second_diff_1d(n, d, periodic):
    main = -2.0 * np.ones(n)
    off = np.ones(n - 1)
    m = sparse.diags([off, main, off], [-1, 0, 1], shape=(n, n), format="lil")
    if periodic:
        m[0, n - 1] = 1.0
        m[n - 1, 0] = 1.0
    return m.tocsr() / d**2


def _semi_implicit(state, config, weight):
    h, t, dt = state.h, state.t, config.dt
    c = config.params.sum
    periodic = state.bc.kind is BC.PERIODIC
    if periodic:
        n1, n2 = h.shape
        L = sparse.kron(_second_diff_1d(n1, state.spacing[0], True), sparse.identity(n2)) \
            + sparse.kron(sparse.identity(n1), _second_diff_1d(n2, state.spacing[1], True))
        coef = (dt * c * np.exp(-h) / weight).ravel()
        M = sparse.identity(h.size) - sparse.diags(coef) @ L
        return splinalg.spsolve(M.tocsc(), h.ravel()).reshape(h.shape)
    new_bnd = _impose(h, state, t + dt)
    inner = h[1:-1, 1:-1]
    n1, n2 = inner.shape
    L = sparse.kron(_second_diff_1d(n1, state.spacing[0], False), sparse.identity(n2)) \
        + sparse.kron(sparse.identity(n1), _second_diff_1d(n2, state.spacing[1], False))
    ring = new_bnd.copy()
    ring[1:-1, 1:-1] = 0.0
    ring_lap = grid_laplacian(ring, state.spacing, False)[1:-1, 1:-1]
    coef = dt * c * np.exp(-inner) / weight[1:-1, 1:-1]
    M = sparse.identity(inner.size) - sparse.diags(coef.ravel()) @ L
    rhs = inner + coef * ring_lap
    out = new_bnd.copy()
    out[1:-1, 1:-1] = splinalg.spsolve(M.tocsc(), rhs.ravel()).reshape(inner.shape)
    return out


def step(state: ConformalGridState, config: SolverConfig) -> ConformalGridState:
    """Advance one time step in the Cartesian or parabolic ``(u, v)`` chart."""
    weight = state.weight()
    params, dt, t = config.params, config.dt, state.t
    if config.scheme is not Scheme.SEMI_IMPLICIT and config.cfl_guard:
        limit = stable_dt(state, params)
        if dt > limit:
            raise CFLViolation(dt, limit)
    if config.scheme is Scheme.EXPLICIT_EULER:
        h = _impose(state.h + dt * _rhs(state.h, state, params, weight), state, t + dt)
    elif config.scheme is Scheme.RK4:
        h0 = state.h
        k1 = _rhs(h0, state, params, weight)
        h1 = _impose(h0 + 0.5 * dt * k1, state, t + 0.5 * dt)
        k2 = _rhs(h1, state, params, weight)
        h2 = _impose(h0 + 0.5 * dt * k2, state, t + 0.5 * dt)
        k3 = _rhs(h2, state, params, weight)
        h3 = _impose(h0 + dt * k3, state, t + dt)
        k4 = _rhs(h3, state, params, weight)
        h = _impose(h0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), state, t + dt)
    else:
        h = _semi_implicit(state, config, weight)
    if not np.all(np.isfinite(h)) or np.max(np.abs(h)) > BLOWUP_LIMIT:
        raise BlowUpError(f"conformal exponent left [-{BLOWUP_LIMIT}, {BLOWUP_LIMIT}] at t={t + dt:.6g}", t)
    return state.with_h(h, t + dt)


def step_cartesian(state: ConformalGridState, config: SolverConfig) -> ConformalGridState:
    if state.chart is not Chart.CARTESIAN:
        raise PreconditionError(f"step_cartesian needs a Cartesian state, got {state.chart.value}")
    return step(state, config)


def step_liouville(state: ConformalGridState, config: SolverConfig) -> ConformalGridState:
    if state.chart is not Chart.PARABOLIC_UV:
        raise PreconditionError(f"step_liouville needs a ParabolicUV state, got {state.chart.value}")
    return step(state, config)


# ---------------------------------------------------------------------------
# sampling and runs


def _fractional_index(state, points):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return np.stack([(pts[:, k] - state.origin[k]) / state.spacing[k] for k in range(2)])


def sample(state: ConformalGridState, values: np.ndarray, points, order: int = 3) -> np.ndarray:
    """Spline-interpolate a nodal array at chart points (shape ``(m, 2)``)."""
    idx = _fractional_index(state, points)
    if state.bc.kind is BC.PERIODIC:
        return ndimage.map_coordinates(values, idx, order=order, mode="grid-wrap")
    n = np.array(values.shape)[:, None]
    if np.any(idx < -1e-9) or np.any(idx > n - 1 + 1e-9):
        raise EvaluationDomainError("sample point outside the grid")
    return ndimage.map_coordinates(values, idx, order=order, mode="nearest")


@dataclass
class Trajectory:
    snapshots: list
    probes: list
    aborted: bool = False
    abort_reason: str = ""
    last_valid_t: Optional[float] = None

    @property
    def final(self) -> ConformalGridState:
        return self.snapshots[-1]


def _probe_rows(state, prev, dt, params, probes):
    if not probes:
        return []
    K = gauss_curvature_grid(state)
    if prev is None:
        ht = _rhs(state.h, state, params, state.weight())
    else:
        ht = (state.h - prev) / dt
    # trace of the RY map of e^h w I: 2 (h_t + 2 (a + b) K)
    rate = 2.0 * (ht + 2.0 * params.sum * K)
    interior = state.bc.kind is BC.PERIODIC
    rows = []
    for tp, pt in probes:
        if abs(tp - state.t) > 0.5 * dt + 1e-12 * max(1.0, abs(tp)):
            continue
        pt = np.asarray(pt, dtype=float)
        # boundary rows are NaN on Dirichlet grids; linear sampling keeps NaN local
        order = 3 if interior else 1
        rows.append({
            "t": state.t,
            "coord1": float(pt[0]),
            "coord2": float(pt[1]),
            "h": float(sample(state, state.h, [pt], order)[0]),
            "K": float(sample(state, np.nan_to_num(K, nan=0.0) if interior else K, [pt], order)[0]),
            "vol_rate": float(sample(state, rate, [pt], order)[0]),
        })
    return rows


def run_flow(initial: ConformalGridState, config: SolverConfig, probes: Sequence = (),
             snapshot_every: int = 1, curvature_stop: Optional[float] = None) -> Trajectory:
    """Evolve ``initial`` for ``config.steps`` steps.

    Snapshots are kept every ``snapshot_every`` steps (first and last always).
    ``probes`` is a list of ``(t, point)``; each is recorded at the step whose
    time is within ``dt/2``.  A blow-up, or ``max |K| dt > curvature_stop``,
    ends the run early with ``aborted`` set.
    """
    if config.cfl_guard and config.scheme is not Scheme.SEMI_IMPLICIT:
        limit = stable_dt(initial, config.params)
        if config.dt > limit:
            raise CFLViolation(config.dt, limit)
    probes = [(float(t), tuple(p)) for t, p in probes]
    state, prev = initial, None
    snaps = [initial]
    rows = _probe_rows(state, None, config.dt, config.params, probes)
    traj = Trajectory(snaps, rows, last_valid_t=initial.t)
    for n in range(1, config.steps + 1):
        try:
            new = step(state, config)
        except (BlowUpError, CFLViolation) as exc:
            traj.aborted, traj.abort_reason = True, str(exc)
            log.warning("run stopped at t=%.6g: %s", state.t, exc)
            if snaps[-1] is not state:
                snaps.append(state)
            return traj
        prev, state = state.h, new
        traj.last_valid_t = state.t
        if curvature_stop is not None:
            kmax = float(np.nanmax(np.abs(gauss_curvature_grid(state))))
            if kmax * config.dt > curvature_stop:
                traj.aborted = True
                traj.abort_reason = f"max|K| dt = {kmax * config.dt:.3g} exceeds {curvature_stop}"
                snaps.append(state)
                return traj
        rows.extend(_probe_rows(state, prev, config.dt, config.params, probes))
        if n % snapshot_every == 0 or n == config.steps:
            snaps.append(state)
    return traj
