import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rymap.errors import EvaluationDomainError
from rymap.pde.charts import chart_map, chart_transfer, elliptic_forward
from rymap.pde.solver import BC, BoundaryCondition, Chart, ConformalGridState


def cartesian(n=41, L=2.0, fn=lambda X, Y: np.exp(-(X**2 + Y**2)) * np.cos(X - Y)):
    d = 2 * L / (n - 1)
    s = ConformalGridState(Chart.CARTESIAN, np.zeros((n, n)), (d, d), (-L, -L), 0.0, BoundaryCondition.dirichlet())
    return s.with_h(fn(*s.coords()), 0.0)


def test_identity_transfer_is_bitwise_at_nodes():
    s = cartesian()
    out = chart_transfer(s, Chart.CARTESIAN, s.origin, s.spacing, s.shape)
    np.testing.assert_array_equal(out.h, s.h)
    assert out.meta["interpolation_error_estimate"] == 0.0
    sub = chart_transfer(s, Chart.CARTESIAN, (-1.0, -1.0), s.spacing, (11, 11))
    np.testing.assert_array_equal(sub.h, s.h[10:21, 10:21])


def test_round_trip_through_parabolic_chart():
    fn = lambda X, Y: np.exp(-(X**2 + Y**2) / 2)
    s = cartesian(81, fn=fn)
    uv = chart_transfer(s, Chart.PARABOLIC_UV, (1.0, -0.5), (0.02, 0.02), (26, 51))
    U, V = uv.coords()
    exact = fn((U**2 - V**2) / 2, U * V)
    err_uv = np.max(np.abs(uv.h - exact))
    assert err_uv <= 10 * uv.meta["interpolation_error_estimate"] + 1e-12
    back = chart_transfer(uv, Chart.CARTESIAN, (0.7, -0.3), (0.05, 0.05), (5, 13))
    X, Y = back.coords()
    assert np.max(np.abs(back.h - fn(X, Y))) < 1e-4
    assert back.bc.kind is BC.DIRICHLET


def test_radial_function_is_angle_independent_in_polar_chart():
    s = cartesian(81, fn=lambda X, Y: np.exp(-(X**2 + Y**2)))
    pol = chart_transfer(s, Chart.POLAR, (0.5, 0.0), (0.1, 2 * np.pi / 32), (11, 32))
    spread = np.ptp(pol.h, axis=1)
    assert np.max(spread) < 1e-4
    np.testing.assert_allclose(pol.h[:, 0], np.exp(-pol.axes()[0] ** 2), atol=1e-4)


def test_uncovered_target_points_raise():
    s = cartesian()
    with pytest.raises(EvaluationDomainError, match="not covered"):
        chart_transfer(s, Chart.CARTESIAN, (1.5, 1.5), s.spacing, (11, 11))
    with pytest.raises(EvaluationDomainError, match="degenerate"):
        chart_transfer(s, Chart.POLAR, (0.0, 0.0), (0.1, 0.1), (5, 5))


def test_periodic_source_wraps():
    n = 32
    d = 2 * np.pi / n
    s = ConformalGridState(Chart.CARTESIAN, np.zeros((n, n)), (d, d), (0, 0))
    X, Y = s.coords()
    s = s.with_h(np.sin(X) * np.cos(Y), 0.0)
    out = chart_transfer(s, Chart.CARTESIAN, (2 * np.pi, 0.0), (d, d), (6, 6))
    np.testing.assert_array_equal(out.h, s.h[:6, :6])


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, -0.05), st.floats(0.05, 0.95), st.floats(0.3, 3))
def test_elliptic_inverse_recovers_chart_point(u, v, c):
    m = chart_map(Chart.ELLIPTIC_UV, c)
    X, Y = elliptic_forward(u, v, c)
    uu, vv = m.inverse(np.array(X), np.array(Y))
    assert float(uu) == pytest.approx(u, abs=1e-8)
    assert float(vv) == pytest.approx(v, abs=1e-8)


@pytest.mark.parametrize("chart, point", [(Chart.POLAR, (1.3, 0.4)), (Chart.PARABOLIC_UV, (0.8, -0.6)),
                                          (Chart.ELLIPTIC_UV, (-0.6, 0.4))])
def test_jacobian_matches_finite_differences(chart, point):
    m = chart_map(chart, 1.3)
    a, b = point
    eps = 1e-6
    num = np.empty((2, 2))
    for k, (da, db) in enumerate([(eps, 0), (0, eps)]):
        p = np.array(m.forward(a + da, b + db))
        q = np.array(m.forward(a - da, b - db))
        num[:, k] = (p - q) / (2 * eps)
    np.testing.assert_allclose(np.asarray(m.jacobian(a, b), float), num, atol=1e-7)
