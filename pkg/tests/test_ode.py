import math

import numpy as np
import pytest

from radialcheck.expr import evaluate, parse
from radialcheck.ode import (HomogeneityError, classify_point, polar_separate, rk4_oracle,
                             solve_polar)


def real(text):
    return parse(text, "real", 2)


def field(p, q):
    return real(p), real(q)


def test_circles_separation():
    hf = polar_separate(*field("x", "y"))
    th = np.linspace(0, 2 * math.pi, 50)
    assert hf.degree == pytest.approx(1.0) and np.all(hf.G(th) == 0.0)
    num, den = hf.parts(th)
    np.testing.assert_allclose(num, 0.0, atol=1e-15)
    np.testing.assert_allclose(den, 1.0, atol=1e-15)


def test_hyperbola_separation():
    hf = polar_separate(*field("y", "x"))
    th = np.array([0.3, 0.7, 1.2, 2.0])
    np.testing.assert_allclose(hf.G(th), -np.cos(2 * th) / np.sin(2 * th), rtol=1e-12)


@pytest.mark.parametrize("p, q", [("x^2", "y"), ("x+y^2", "y"), ("x*y+1", "x")])
def test_homogeneity_mismatch(p, q):
    with pytest.raises(HomogeneityError) as info:
        polar_separate(*field(p, q))
    assert info.value.code == "HOMOGENEITY_MISMATCH"


@pytest.mark.parametrize("text", ["x+y^2", "x*y+1"])
def test_residual_reported_large(text):
    from radialcheck.ode import _homogeneity
    _, residual = _homogeneity(real(text))
    assert residual > 1e-3


def test_circle_trajectory():
    sol = solve_polar(polar_separate(*field("x", "y")), 1.0, 0.0, 2 * math.pi)
    assert not sol.truncated
    np.testing.assert_allclose(sol.r, 1.0, atol=1e-10)
    pts = sol.points
    np.testing.assert_allclose(np.hypot(pts[:, 0], pts[:, 1]), 1.0, atol=1e-6)
    np.testing.assert_allclose(pts[-1], (1.0, 0.0), atol=1e-6)


def test_hyperbola_trajectory_preserves_product():
    sol = solve_polar(polar_separate(*field("y", "x")), math.sqrt(2), math.pi / 4, 0.6)
    pts = sol.points
    assert np.max(np.abs(pts[:, 0] * pts[:, 1] - 1.0)) <= 1e-6


def test_zero_span():
    sol = solve_polar(polar_separate(*field("y", "x")), 1.0, 0.3, 0.0)
    assert sol.thetas.tolist() == [0.3] and sol.r.tolist() == [1.0]


def test_pole_truncates():
    # G has a pole where the denominator sin(2 theta) vanishes
    sol = solve_polar(polar_separate(*field("y", "x")), math.sqrt(2), math.pi / 4, 2.0)
    assert sol.truncated and sol.pole == pytest.approx(math.pi / 2, abs=1e-9)


def test_residual_per_arc_length():
    P, Q = field("x+2*y", "3*x-y")
    sol = solve_polar(polar_separate(P, Q), 1.0, 0.5, 0.4, step=1e-3)
    pts = sol.points
    d = np.diff(pts, axis=0)
    mid = 0.5 * (pts[1:] + pts[:-1])
    pv = np.array([evaluate(P, m).payload for m in mid])
    qv = np.array([evaluate(Q, m).payload for m in mid])
    arc = np.hypot(d[:, 0], d[:, 1])
    assert np.max(np.abs(qv * d[:, 1] + pv * d[:, 0]) / arc) <= 1e-6


def _compare_with_rk4(P, Q, r0, theta0, span):
    sol = solve_polar(polar_separate(P, Q), r0, theta0, span, step=1e-3)
    assert not sol.truncated
    pts = sol.points
    arc = float(np.sum(np.hypot(*np.diff(pts, axis=0).T)))
    start = pts[0]
    tx, ty = evaluate(Q, start).payload, -evaluate(P, start).payload
    orient = 1.0 if (start[0] * ty - start[1] * tx) * span >= 0 else -1.0
    traj = rk4_oracle(P, Q, start, arc, 1e-3, orient)
    assert traj.status == "OK"
    theta = np.unwrap(np.arctan2(traj.points[:, 1], traj.points[:, 0]))
    theta = theta - theta[0] + theta0
    inside = np.flatnonzero((theta - theta0) * np.sign(span) <= abs(span))[::25]
    r_polar = np.array([sol.r_at(t) for t in theta[inside]])
    r_rk4 = np.hypot(traj.points[inside, 0], traj.points[inside, 1])
    return float(np.max(np.abs(r_polar - r_rk4)))


CORPUS = [
    ("x", "y", 1.0, 0.0, 2 * math.pi),
    ("y", "x", math.sqrt(2), math.pi / 4, 0.6),
    ("x+2*y", "3*x-y", 1.0, 0.5, 0.4),
    ("x^2+y^2", "x*y", 1.0, 0.6, 0.5),
    ("x^3-y^3", "x*y^2+x^3", 1.2, 0.2, 0.5),
]


@pytest.mark.parametrize("p, q, r0, theta0, span", CORPUS)
def test_agrees_with_rk4(p, q, r0, theta0, span):
    assert _compare_with_rk4(*field(p, q), r0, theta0, span) <= 1e-4


def test_rk4_circle_closes():
    traj = rk4_oracle(*field("x", "y"), (1.0, 0.0), 2 * math.pi, 1e-2)
    np.testing.assert_allclose(traj.points[-1], (1.0, 0.0), atol=1e-6)


def test_rk4_critical_point():
    assert rk4_oracle(*field("x", "y"), (0.0, 0.0), 1.0).status == "CRITICAL_POINT"


@pytest.mark.parametrize("p, q, point, classical, multi", [
    ("x", "y", (0.0, 0.0), True, False),
    ("x", "y", (1.0, 1.0), False, False),
    ("y", "x", (0.0, 0.0), True, True),
])
def test_classify_point(p, q, point, classical, multi):
    rep = classify_point(*field(p, q), point)
    assert (rep.classical_singular, rep.polar_multi_curve) == (classical, multi)
    assert rep.reading


def test_multi_curve_lines_for_hyperbolas():
    rep = classify_point(*field("y", "x"), (0.0, 0.0))
    np.testing.assert_allclose(sorted(rep.zero_directions), [0.0, math.pi / 2], atol=1e-9)
