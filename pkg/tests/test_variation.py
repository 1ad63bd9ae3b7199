import math

import numpy as np
import pytest

from rymap import flows as fl
from rymap import variation as var
from rymap.errors import NotRYFlowError, PositivityError, PreconditionError
from rymap.geometry import DiffSpec, MetricField
from rymap.pde.solver import BoundaryCondition, Chart, ConformalGridState, SolverConfig, run_flow
from rymap.ry import RYParams

LADDER = (0.07, 0.035, 0.0175)


def steady_cigar(params):
    return fl.make_flow(fl.GeneralizedCigar(fl.cigar_steady_potential(params)))


def static_flat():
    return MetricField(2, lambda t, p: np.eye(2), exact_dt=lambda t, p: np.zeros((2, 2)), name="flat")


@pytest.mark.parametrize("op", [var.christoffel_variation_residual, var.scalar_variation_residual,
                                var.volume_form_variation_residual])
def test_identities_vanish_on_static_flat(op):
    r = op(static_flat(), 0.0, [0.2, 0.1], RYParams(1.0, 0.5))
    assert r.residual_norm < 1e-9
    assert not r.report_only


@pytest.mark.parametrize("params", [RYParams(1, 0), RYParams(0.25, 0.75)])
def test_christoffel_identity_converges_on_cigar(params):
    r = var.refine(var.christoffel_variation_residual, LADDER, steady_cigar(params), 0.0, [0.3, 0.4], params)
    assert [h for h, _ in r.step_sequence] == list(LADDER)
    assert r.observed_order >= 1.8
    assert r.residual_norm < 1e-6


def test_scalar_identity_surface_forms_agree():
    params = RYParams(1, 0)
    r = var.scalar_variation_residual(steady_cigar(params), 0.0, [0.0, 0.0], params, DiffSpec(0.01, 2, True), dt=0.01)
    assert r.lhs.shape == (3,)
    # K(t, 0) = 2 f / (f + 0) stays 2, so both sides vanish at the origin
    assert abs(r.lhs[2]) < 1e-5
    # the R-line and the K-line are the same statement under R = 2K
    assert r.lhs[1] == pytest.approx(2 * r.lhs[2], rel=1e-10)
    np.testing.assert_allclose(r.lhs, r.rhs, atol=1e-5)


def test_volume_form_identity_matches_closed_form_at_origin():
    params = RYParams(0.6, 0.4)
    r = var.volume_form_variation_residual(steady_cigar(params), 0.2, [0.0, 0.0], params)
    f = math.exp(4 * 0.2)
    assert r.lhs[0] == pytest.approx(-4 * params.sum / f, rel=1e-8)
    # R(t, 0) = 2 K(t, 0) = 4 and sqrt(det g) = 1 / f at the origin
    assert r.rhs[0] == pytest.approx(-params.sum * 4.0 / f, rel=1e-8)


def test_strict_mode_refuses_non_ry_flow():
    flow = fl.make_flow(fl.GeneralizedCigar(fl.Potential.constant(1.0)))
    with pytest.raises(NotRYFlowError):
        var.christoffel_variation_residual(flow, 0.0, [0.3, 0.4], RYParams(1, 0))
    r = var.christoffel_variation_residual(flow, 0.0, [0.3, 0.4], RYParams(1, 0), strict=False)
    assert r.report_only


def test_constant_volume_case_on_static_cigar():
    params = RYParams(1, -1)
    flow = steady_cigar(params)
    r = var.constant_volume_scalar_residual(flow, 0.3, [0.3, 0.4], params)
    assert r.residual_norm < 1e-8
    with pytest.raises(PreconditionError):
        var.constant_volume_scalar_residual(flow, 0.0, [0, 0], RYParams(1, 0))


def test_observed_orders():
    seq = [(0.1, 1e-2), (0.05, 2.5e-3), (0.025, 6.25e-4)]
    np.testing.assert_allclose(var.observed_orders(seq), [2.0, 2.0])
    with pytest.raises(ValueError):
        var.refine(var.volume_form_variation_residual, (0.01, 0.02), static_flat(), 0.0, [0, 0], RYParams(1, 0))


def test_recurrent_eta_on_cigar():
    flow = steady_cigar(RYParams(1, 0))
    rec = var.recurrent_eta(flow, 0.0, [0.3, 0.4])
    s = 1.0 + 0.25
    np.testing.assert_allclose(rec.eta, [-2 * 0.3 / s, -2 * 0.4 / s], atol=1e-6)
    assert rec.recurrence_residual < 1e-7


def test_recurrent_eta_requires_positive_curvature():
    flow = fl.make_flow(fl.Conformal(fl.Potential.constant(1.0), fl.hyperbolic(2)))
    with pytest.raises(PositivityError):
        var.recurrent_eta(flow, 0.0, [0.0, 1.0])


def test_recurrent_residuals_on_shrinking_round_sphere():
    params = RYParams(0.7, 0.3)
    # f(t) = 1 - 2 (a + b) t makes f g_sphere an RY flow with K(t) = 1 / (1 - 2 (a + b) t)
    flow = fl.make_flow(fl.Conformal(fl.Potential.linear(1.0, -2 * params.sum), fl.round_sphere(2)))
    t = 0.1
    g_res, c_res = var.recurrent_variation_residuals(flow, t, [0.2, -0.3], params, eta=lambda q: np.zeros(2))
    K = 1 / (1 - 2 * params.sum * t)
    assert c_res.lhs[1] == pytest.approx(2 * params.sum * K**2, rel=1e-6)
    assert g_res.residual_norm < 1e-6
    assert c_res.residual_norm < 1e-5


def test_recurrent_residuals_converge_on_cigar():
    params = RYParams(1, 0)
    res = [var.recurrent_variation_residuals(steady_cigar(params), 0.0, [0.5, 0.0], params,
                                             DiffSpec(h, 2, True), dt=h)[1].residual_norm for h in LADDER]
    assert res[-1] < res[0]
    assert res[-1] < 1e-5


def periodic_run(h0, params, T=0.05):
    n = h0.shape[0]
    d = 2 * np.pi / n
    state = ConformalGridState(Chart.CARTESIAN, h0, (d, d), (0.0, 0.0), 0.0, BoundaryCondition.periodic())
    steps = 100
    return run_flow(state, SolverConfig(params, T / steps, steps), snapshot_every=20)


def test_lower_bound_trivial_cases():
    params = RYParams(1, 0)
    n = 32
    x = 2 * np.pi / n * np.arange(n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    flat = periodic_run(np.zeros((n, n)), params)
    report = var.curvature_lower_bound_check(flat, params)
    assert report.passed and len(report.rows) == 5
    bump = periodic_run(0.3 * np.sin(X) * np.sin(Y), params)
    assert var.curvature_lower_bound_check(bump, params).passed


def test_lower_bound_preconditions():
    with pytest.raises(PreconditionError):
        var.curvature_lower_bound_check([], RYParams(0.5, 0))
    n = 8
    state = ConformalGridState(Chart.CARTESIAN, np.zeros((n, n)), (0.1, 0.1), (0, 0), 0.1,
                               BoundaryCondition.dirichlet())
    with pytest.raises(PreconditionError):
        var.curvature_lower_bound_check([state], RYParams(1, 0))
