import math

import numpy as np
import pytest

from oracles import poincare_oracle, warped_oracle
from rymap import flows as fl
from rymap import ry
from rymap.errors import ClosedFormUnavailable, EvaluationDomainError, PreconditionError
from rymap.geometry import DiffSpec
from rymap.ry import RYParams


@pytest.mark.parametrize("k", [-1.0, 0.0, 1.0, 1e-9])
def test_snk_solves_its_ode(k):
    sn = fl.SnK(k)
    assert sn(0.0) == 0.0
    assert sn.d1(0.0) == pytest.approx(1.0, abs=1e-12)
    for u in (0.1, 0.7, 1.3):
        assert sn.d2(u) + k * sn(u) == pytest.approx(0.0, abs=1e-10)


def test_snk_continuous_near_zero_curvature():
    assert fl.SnK(1e-8)(0.9) == pytest.approx(fl.SnK(0.0)(0.9), rel=1e-7)


def test_potential_closed_forms():
    f = fl.Potential.exponential(2.0)
    assert f(0.5) == pytest.approx(math.e)
    assert f.F(0.5) == pytest.approx((1 - math.exp(-1.0)) / 2.0)
    lin = fl.Potential.linear(1.0, 2.0)
    assert lin.F_sqrt(1.5) == pytest.approx(2 * (2 - 1) / 2.0)


def test_potential_quadrature_fallback():
    f = fl.Potential(lambda t: 1.0 + t * t, label="1+t^2")
    assert f.F(1.0) == pytest.approx(math.atan(1.0), abs=1e-10)
    assert f.d(0.5) == pytest.approx(1.0, rel=1e-8)


def test_cone_at_unit_time_is_base():
    base = fl.hyperbolic(2)
    flow = fl.make_flow(fl.Cone(base))
    np.testing.assert_allclose(flow(1.0, [0.2, 1.5]), base(0.0, [0.2, 1.5]))


def test_hamilton_cigar_at_origin_is_identity():
    flow = fl.make_flow(fl.GeneralizedCigar(fl.Potential.constant(1.0)))
    np.testing.assert_allclose(flow(3.0, [0, 0]), np.eye(2))


def test_convex_euclidean_endpoint_is_identity():
    flow = fl.make_flow(fl.ConvexEuclidean.gaussian_bump(0.5))
    np.testing.assert_allclose(flow(1.0, [0.3, -0.2]), np.eye(2))


def test_cigar_requires_unit_start():
    with pytest.raises(PreconditionError):
        fl.make_flow(fl.GeneralizedCigar(fl.Potential.linear(2.0, 1.0)))


def test_poincare_domain():
    flow = fl.make_flow(fl.Poincare(2))
    with pytest.raises(EvaluationDomainError):
        flow(0.0, [0.0, -1.0])


def test_exact_dt_matches_time_difference():
    from rymap.geometry import time_derivative

    for kind in (fl.Poincare(3), fl.GeneralizedCigar(fl.Potential.exponential(1.5)),
                 fl.WarpedRotSym(fl.Potential.exponential(0.5), 1.0), fl.ConvexEuclidean.gaussian_bump()):
        flow = fl.make_flow(kind)
        p = np.array([0.3, 0.6, 1.2][: flow.dim])
        num = time_derivative(lambda s: flow(s, p), 0.4)
        np.testing.assert_allclose(flow.dt(0.4, p), num, atol=1e-9)


def test_printed_ric_scalar_examples():
    ric, R = fl.printed_ric_scalar(fl.Conformal(fl.Potential.exponential(1.0), fl.euclidean(2)), 0.3, [0, 0])
    np.testing.assert_allclose(ric, 0.0)
    assert R == 0.0
    ric, R = fl.printed_ric_scalar(fl.Poincare(2), 0.0, [0.2, 1.4])
    np.testing.assert_allclose(ric, 0.0)
    assert R == 0.0
    _, R = fl.printed_ric_scalar(fl.Poincare(3), 1.0, [0.0, 0.0, 1.0])
    assert R == pytest.approx(-2.5)
    with pytest.raises(ClosedFormUnavailable):
        fl.printed_ric_scalar(fl.GeneralizedCigar(fl.Potential.constant(1.0)), 0.0, [0, 0])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_poincare_printed_curvature_against_symbolic(n):
    ric_f, scal_f = poincare_oracle(n)
    t, p = 0.7, np.array([0.1] * (n - 1) + [1.6])
    ric, R = fl.printed_ric_scalar(fl.Poincare(n), t, p)
    np.testing.assert_allclose(ric, np.asarray(ric_f(t, *p), float), atol=1e-12)
    assert R == pytest.approx(float(scal_f(t, *p)), rel=1e-12)


def test_printed_ry_examples():
    params = RYParams(0.5, 0.5)
    kind = fl.GeneralizedCigar(fl.cigar_steady_potential(params))
    for t, p in [(0.0, [0, 0]), (0.7, [1.0, -2.0])]:
        np.testing.assert_array_equal(fl.printed_ry(kind, t, np.array(p, float), params), 0.0)
    y = 1.7
    np.testing.assert_allclose(fl.printed_ry(fl.Poincare(2), 0.0, [0.0, y], RYParams(1, 0)), -math.log(y) * np.eye(2))


def test_cone_over_einstein_base_is_constant_multiple_of_base():
    params = RYParams(0.4, 0.3)
    base = fl.round_sphere(3)
    kind = fl.Cone(base)
    for p in ([0.1, 0.2, 0.3], [1.0, -0.5, 0.0]):
        p = np.array(p)
        expected = (1 + (params.beta + 2 * params.alpha / 3) * 6.0) * base(0.0, p)
        np.testing.assert_allclose(fl.printed_ry(kind, 2.0, p, params), expected, rtol=1e-12)


def test_cigar_steady_potential_values():
    assert fl.cigar_steady_potential(RYParams(1, 0))(0.25) == pytest.approx(math.e)
    assert fl.cigar_steady_potential(RYParams(1, -1))(5.0) == 1.0
    assert fl.cigar_steady_potential(RYParams(0.5, 0.5))(1.0) == pytest.approx(54.598150033, rel=1e-9)


def test_printed_volume_variation_examples():
    rate, acc = fl.printed_volume_variation(fl.Conformal(fl.Potential.exponential(1.0), fl.euclidean(3)), 0.4,
                                          [0, 0, 0], RYParams(1, 0))
    assert rate == pytest.approx(3.0)
    c = 2.0
    rate, acc = fl.printed_volume_variation(fl.GeneralizedCigar(fl.Potential.exponential(c)), 0.3, [0.1, 0.2],
                                          RYParams(0.25, 0.25))
    assert rate == pytest.approx(0.0, abs=1e-15)
    assert acc is None
    _, acc = fl.printed_volume_variation(fl.WarpedRotSym(fl.Potential.exponential(1.0), 0.0), 0.8, [0.5, 0.1],
                                       RYParams(1, 0))
    assert acc == pytest.approx(0.8)


def test_warped_exact_curvature_against_symbolic():
    ric_f, scal_f = warped_oracle(1.0)
    kind = fl.WarpedRotSym(fl.Potential.exponential(0.5), 1.0)
    flow = fl.make_flow(kind)
    t, p = 0.4, np.array([0.9, 0.3])
    b = flow.exact_curvature(t, p)
    F = math.exp(0.2)
    np.testing.assert_allclose(b.ricci, np.asarray(ric_f(F, *p), float), atol=1e-12)
    assert b.scalar == pytest.approx(float(scal_f(F, *p)))


@pytest.mark.parametrize("kind, point", [
    (fl.Conformal(fl.Potential.exponential(0.7), fl.round_sphere(2)), [0.3, -0.4]),
    (fl.ConvexEuclidean.gaussian_bump(0.5), [0.3, 0.4]),
    (fl.Poincare(2), [0.2, 1.3]),
    (fl.Poincare(3), [0.2, -0.1, 1.3]),
    (fl.GeneralizedCigar(fl.Potential.exponential(1.0)), [0.6, -0.2]),
])
def test_printed_ry_matches_engine_where_self_consistent(kind, point):
    params = RYParams(0.8, 0.3)
    flow = fl.make_flow(kind)
    for t in (0.2, 0.6):
        engine = ry.ry_eval(flow, t, point, params, DiffSpec(1e-3, 2, True), curvature="engine")
        np.testing.assert_allclose(fl.printed_ry(kind, t, np.array(point), params), engine, atol=1e-7)


def test_printed_warped_form_disagrees_with_engine():
    kind = fl.WarpedRotSym(fl.Potential.exponential(1.0), 1.0)
    flow = fl.make_flow(kind)
    params = RYParams(1, 0)
    engine = ry.ry_eval(flow, 0.3, [0.7, 0.2], params, curvature="engine")
    exact = ry.ry_eval(flow, 0.3, [0.7, 0.2], params, curvature="exact")
    np.testing.assert_allclose(engine, exact, atol=1e-8)
    assert np.max(np.abs(fl.printed_ry(kind, 0.3, np.array([0.7, 0.2]), params) - engine)) > 1.0
