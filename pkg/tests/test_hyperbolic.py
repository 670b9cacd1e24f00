import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from eisenlab.hyperbolic import (
    INFINITY,
    BoundaryPoint,
    CuspCoord,
    FlowFrame,
    GeodesicChartPoint,
    GeometryError,
    HPoint,
    R_CUSP,
    UnimodularMatrix,
    ball_deriv,
    boundary_apply,
    chart_T,
    chart_T_angles,
    chart_T_inverse,
    cusp_to_H,
    downward_frame,
    frame_at,
    frame_flow,
    H_to_cusp,
    hyperbolic_distance,
    mobius_apply,
    mobius_im,
)

coord = st.floats(-5, 5, allow_nan=False)
height = st.floats(0.05, 5)
entry = st.floats(-3, 3, allow_nan=False)
finite_q = st.floats(-20, 20, allow_nan=False)


@st.composite
def unimodular(draw):
    a = draw(st.floats(0.3, 3)) * draw(st.sampled_from([-1, 1]))
    b, c = draw(entry), draw(entry)
    return UnimodularMatrix(a, b, c, (1 + b * c) / a)


def points():
    return st.builds(HPoint, coord, height)


def test_mobius_translation_and_inversion():
    assert mobius_apply(UnimodularMatrix(1, 1, 0, 1), HPoint(0, 1)).z == 1 + 1j
    w = mobius_apply(UnimodularMatrix(0, -1, 1, 0), HPoint(0, 2))
    assert w.z == pytest.approx(0.5j, abs=1e-15)


def test_mobius_against_exact_rationals():
    # (2z + 1)/(z + 1) at z = i is (3 + i)/2
    z = (Fraction(0), Fraction(1))
    num = (2 * z[0] + 1, 2 * z[1])
    den = (z[0] + 1, z[1])
    n2 = den[0] ** 2 + den[1] ** 2
    exact = ((num[0] * den[0] + num[1] * den[1]) / n2, (num[1] * den[0] - num[0] * den[1]) / n2)
    w = mobius_apply(UnimodularMatrix(2, 1, 1, 1), HPoint(0, 1))
    assert (w.x, w.y) == (float(exact[0]), float(exact[1]))


@pytest.mark.parametrize("M, z, expected", [
    (UnimodularMatrix(0, -1, 1, 0), HPoint(0, 1), 1.0),
    (UnimodularMatrix(1, 0, 1, 1), HPoint(0, 1), 0.5),
])
def test_mobius_im_examples(M, z, expected):
    assert mobius_im(M, z) == pytest.approx(expected, rel=1e-15)


@given(unimodular(), points())
def test_mobius_im_matches_complex_evaluation(M, z):
    w = (M.a * z.z + M.b) / (M.c * z.z + M.d)
    assert mobius_im(M, z) == pytest.approx(w.imag, rel=1e-11)


@given(unimodular(), unimodular(), points())
def test_group_action(M1, M2, z):
    lhs = mobius_apply(M1 @ M2, z)
    rhs = mobius_apply(M1, mobius_apply(M2, z))
    assert abs(lhs.z - rhs.z) <= 1e-12 * max(1.0, abs(lhs.z)) * 1e2


def test_rejects_bad_input():
    with pytest.raises(GeometryError):
        HPoint(0.0, 0.0)
    with pytest.raises(GeometryError):
        UnimodularMatrix(1, 0, 0, 2)
    with pytest.raises(GeometryError):
        GeodesicChartPoint(INFINITY, INFINITY, 0.0)
    with pytest.raises(GeometryError):
        H_to_cusp(HPoint(0, 1.0))


def test_projective_identification():
    M = UnimodularMatrix(2, 1, 1, 1)
    assert M == UnimodularMatrix(-2, -1, -1, -1)
    assert hash(M) == hash(UnimodularMatrix(-2, -1, -1, -1))


def test_renormalises_small_drift():
    M = UnimodularMatrix(1 + 1e-10, 0, 0, 1)
    assert abs(M.det - 1) < 1e-15


def test_ball_deriv_examples():
    assert ball_deriv(UnimodularMatrix.identity(), BoundaryPoint(0.7)) == pytest.approx(1.0)
    assert ball_deriv(UnimodularMatrix(1, 1, 1, 2), INFINITY) == pytest.approx(0.5)


@pytest.mark.parametrize("M, q", [
    (UnimodularMatrix(0, -1, 1, 0), 0.0),
    (UnimodularMatrix(2, 1, 1, 1), 0.3),
    (UnimodularMatrix(1, 5, 0, 1), -2.0),
])
def test_ball_deriv_finite_difference(M, q):
    # derivative of the induced map on the circle angle, alpha -> 2 atan(M tan(alpha/2))
    def induced(alpha):
        qq = math.tan(alpha / 2)
        return 2 * math.atan((M.a * qq + M.b) / (M.c * qq + M.d))

    alpha, eps = 2 * math.atan(q), 1e-6
    jump = induced(alpha + eps) - induced(alpha - eps)
    fd = math.remainder(jump, 2 * math.pi) / (2 * eps)
    assert abs(fd) == pytest.approx(ball_deriv(M, BoundaryPoint(q)), rel=1e-8)


def test_flow_from_identity_ascends():
    F = frame_flow(FlowFrame(UnimodularMatrix.identity()), 1.0)
    assert F.base.z == pytest.approx(math.e * 1j)


@given(unimodular(), st.floats(-20, 20), st.floats(-20, 20))
def test_flow_group_law(g, s, t):
    F = FlowFrame(g)
    assert frame_flow(frame_flow(F, s), t).isclose(frame_flow(F, s + t), tol=1e-7 * math.exp(abs(s) + abs(t)))


@given(points(), st.floats(0, 2 * math.pi), st.floats(-20, 20))
def test_unit_speed(z, angle, t):
    F = frame_at(z, angle)
    assert hyperbolic_distance(F.base, frame_flow(F, t).base) == pytest.approx(abs(t), abs=1e-10 * max(1, abs(t)) * 10)


def test_flow_time_guard():
    with pytest.raises(GeometryError):
        frame_flow(FlowFrame(UnimodularMatrix.identity()), 201.0)


@given(st.floats(-0.5, 0.5), st.floats(1.2, 50), st.floats(0.01, 3))
def test_downward_frames_descend_in_cusp_coordinates(x, y, t):
    F = downward_frame(HPoint(x, y))
    r0 = math.log(2 * math.pi * F.base.y)
    r1 = math.log(2 * math.pi * frame_flow(F, t).base.y)
    assert (r1 - r0) / t == pytest.approx(-1.0, abs=1e-9)
    assert frame_flow(F, t).base.x == pytest.approx(x, abs=1e-12)


def test_chart_T_examples():
    F = chart_T(GeodesicChartPoint(BoundaryPoint(0.0), INFINITY, 0.0))
    assert F.base.z == pytest.approx(1j)
    assert F.angle == pytest.approx(math.pi / 2)
    G = chart_T(GeodesicChartPoint(INFINITY, BoundaryPoint(0.0), 0.7))
    assert G.base.x == pytest.approx(0.0, abs=1e-14)
    assert G.angle == pytest.approx(1.5 * math.pi)


def test_chart_T_time_zero_is_closest_to_i():
    p = GeodesicChartPoint(BoundaryPoint(-0.4), BoundaryPoint(2.5), 0.0)
    i = HPoint(0, 1)
    d0 = hyperbolic_distance(chart_T(p).base, i)
    for t in (-1e-3, 1e-3, 0.1, -0.1):
        assert hyperbolic_distance(chart_T(GeodesicChartPoint(p.q1, p.q2, t)).base, i) > d0


def test_chart_T_equivariance_translation():
    gamma = UnimodularMatrix(1, 1, 0, 1)
    q1, q2, t = BoundaryPoint(-0.3), BoundaryPoint(1.7), 0.4
    lhs = FlowFrame(gamma @ chart_T(GeodesicChartPoint(q1, q2, t)).g)
    shift = 0.5 * math.log(ball_deriv(gamma, q1) / ball_deriv(gamma, q2))
    rhs = chart_T(GeodesicChartPoint(boundary_apply(gamma, q1), boundary_apply(gamma, q2), t + shift))
    assert lhs.isclose(rhs, tol=1e-12)


@given(unimodular(), finite_q, finite_q, st.floats(-3, 3))
def test_chart_T_equivariance(gamma, a, b, t):
    if abs(a - b) < 1e-2:
        return
    q1, q2 = BoundaryPoint(a), BoundaryPoint(b)
    g1, g2 = boundary_apply(gamma, q1), boundary_apply(gamma, q2)
    lhs = FlowFrame(gamma @ chart_T(GeodesicChartPoint(q1, q2, t)).g)
    shift = 0.5 * math.log(ball_deriv(gamma, q1) / ball_deriv(gamma, q2))
    rhs = chart_T(GeodesicChartPoint(g1, g2, t + shift))
    assert lhs.base.z == pytest.approx(rhs.base.z, rel=1e-9, abs=1e-9)
    assert abs(np.angle(np.exp(1j * (lhs.angle - rhs.angle)))) < 1e-8


def test_chart_T_inverse_identity():
    p = chart_T_inverse(FlowFrame(UnimodularMatrix.identity()))
    assert p.q1.value == 0 and p.q2.is_infinite and p.t == pytest.approx(0.0, abs=1e-15)


@given(finite_q, finite_q, st.floats(-5, 5))
def test_chart_T_round_trip(a, b, t):
    if abs(a - b) < 1e-3:
        return
    F = chart_T(GeodesicChartPoint(BoundaryPoint(a), BoundaryPoint(b), t))
    p = chart_T_inverse(F)
    assert chart_T(p).isclose(F, tol=1e-8)
    assert p.q1.value == pytest.approx(a, rel=1e-8, abs=1e-8)


@given(coord, height)
def test_backward_endpoint_of_downward_frame(x, y):
    # the geodesic through a downward frame comes from infinity and lands on x
    p = chart_T_inverse(downward_frame(HPoint(x, y)))
    assert p.q1.is_infinite
    assert p.q2.value == pytest.approx(x, abs=1e-10)
    # the reversed frame comes from x
    up = chart_T_inverse(frame_at(HPoint(x, y), math.pi / 2))
    assert up.q1.value == pytest.approx(x, abs=1e-10)


@given(st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi), st.floats(-3, 3))
def test_chart_T_angles_matches_scalar(a1, a2, t):
    if abs(math.sin((a1 - a2) / 2)) < 1e-2 or abs(math.cos(a1 / 2)) < 1e-3 or abs(math.cos(a2 / 2)) < 1e-3:
        return
    q1, q2 = BoundaryPoint(math.tan(a1 / 2)), BoundaryPoint(math.tan(a2 / 2))
    F = chart_T(GeodesicChartPoint(q1, q2, t))
    G = FlowFrame(UnimodularMatrix(*(float(v) for v in chart_T_angles(a1, a2, t))))
    assert F.isclose(G, tol=1e-7)


def test_cusp_coordinates():
    assert cusp_to_H(CuspCoord(math.log(2 * math.pi), 0.0)).z == pytest.approx(1j)
    c = H_to_cusp(HPoint(0.3, 2.0))
    assert cusp_to_H(c).z == pytest.approx(0.3 + 2j)
    assert CuspCoord(0.0, -1.0).theta == pytest.approx(2 * math.pi - 1)


@given(st.floats(R_CUSP + 0.01, 8), st.floats(0.01, 6.27))
def test_cusp_metric_pullback(r, theta):
    eps = 1e-6
    p = cusp_to_H(CuspCoord(r, theta))
    dr = (cusp_to_H(CuspCoord(r + eps, theta)).z - cusp_to_H(CuspCoord(r - eps, theta)).z) / (2 * eps)
    th = (cusp_to_H(CuspCoord(r, theta + eps)).z - cusp_to_H(CuspCoord(r, theta - eps)).z) / (2 * eps)
    g = lambda u, v: (u.real * v.real + u.imag * v.imag) / p.y ** 2
    assert g(dr, dr) == pytest.approx(1.0, abs=1e-8)
    assert g(th, th) == pytest.approx(math.exp(-2 * r), abs=1e-8)
    assert g(dr, th) == pytest.approx(0.0, abs=1e-8)


@given(st.floats(R_CUSP + 0.01, 20), st.floats(0, 6.28))
def test_cusp_round_trip(r, theta):
    c = H_to_cusp(cusp_to_H(CuspCoord(r, theta)))
    assert c.r == pytest.approx(r, abs=1e-12)
    assert c.theta == pytest.approx(theta, abs=1e-12)
