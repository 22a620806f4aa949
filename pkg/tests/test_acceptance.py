"""Acceptance criteria 1-10, each checked at its stated tolerance."""

import io
import json
import math
import subprocess
import sys

import numpy as np
import sympy

from acceptance_log import criterion
from corpus import DIFFERENTIABILITY, LIMITS
from radialcheck import (Verdict, cli, differentiability_check, limit_along_path, radial_limit)
from radialcheck.coords import from_cartesian, to_cartesian
from radialcheck.cplx import cr_check, higher_derivative
from radialcheck.expr import compose_linear, parse
from radialcheck.extrema import Classification, classify, radial_stationary_scan
from radialcheck.ode import classify_point, polar_separate, rk4_oracle, solve_polar
from radialcheck.oracle import fd_gradient, uniform_limit_oracle
from radialcheck.radial import PathProbe
from radialcheck.series import polar_convergence_probe, taylor_coeffs

FLAT_SPIKE = "y*exp(-1/x^2)/(y^2+exp(-2/x^2))"


def real(text, n=2):
    return parse(text, "real", n)


def cx(text):
    return parse(text, "complex")


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(argv, out, err)
    return code, json.loads(out.getvalue())


def rotation(n, seed):
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


@criterion(1, "x*y/(x^2+y^2) limit at the origin does not exist; L(theta) = sin cos")
def test_criterion_01():
    code, rep = run_cli(["limit", "x*y/(x^2+y^2)", "--point", "0,0"])
    assert code == 0 and rep["result"]["verdict"] == "NOT_EXISTS"
    per = rep["result"]["per_angle"]
    assert len(per) == 64
    err = max(abs(a["value"] - math.sin(a["angles"][0]) * math.cos(a["angles"][0])) for a in per)
    assert err <= 1e-6, err


@criterion(2, "flat-spike function is UNDEFINED; path limits 1/2 and 0")
def test_criterion_02():
    rep = radial_limit(real(FLAT_SPIKE), (0.0, 0.0))
    assert rep.verdict is Verdict.UNDEFINED
    sing = [a[0] for a in rep.singular_angles]
    for target in (0.0, math.pi):
        assert min(abs(s - target) for s in sing) <= 1e-2
    spike = limit_along_path(real(FLAT_SPIKE), (0.0, 0.0), PathProbe.custom("t", "exp(-1/t^2)"))
    assert abs(spike.value - 0.5) <= 1e-6, spike.value
    parabola = limit_along_path(real(FLAT_SPIKE), (0.0, 0.0), PathProbe.power(3.0, 2.0))
    assert abs(parabola.value) <= 1e-8, parabola.value


@criterion(3, "x^2 y^2/(x^2+y^2) limit is 0; oracle sup = r^2/4 and decreasing")
def test_criterion_03():
    f = real("x^2*y^2/(x^2+y^2)")
    rep = radial_limit(f, (0.0, 0.0))
    assert rep.verdict is Verdict.EXISTS and abs(rep.value) <= 1e-8
    sweep = uniform_limit_oracle(f, (0.0, 0.0), rep.value)
    assert sweep.verdict is Verdict.UNIFORM
    assert np.all(np.diff(sweep.sup) < 0)
    np.testing.assert_allclose(sweep.sup, sweep.radii ** 2 / 4, rtol=1e-6)


@criterion(4, "sqrt(xy) not differentiable at 0; gradient (0.5, 0.5) at (1,1)")
def test_criterion_04():
    f = real("sqrt(x*y)")
    assert differentiability_check(f, (0.0, 0.0)).verdict is Verdict.NOT_DIFFERENTIABLE
    rep = differentiability_check(f, (1.0, 1.0))
    assert rep.verdict is Verdict.DIFFERENTIABLE
    assert np.max(np.abs(np.subtract(rep.gradient, (0.5, 0.5)))) <= 1e-6
    assert np.max(np.abs(np.subtract(rep.gradient, fd_gradient(f, (1.0, 1.0))))) <= 1e-6


@criterion(5, "x y exp(-xy): scan reaches xy = 1, MAX there, SADDLE at 0, Hessian silent")
def test_criterion_05():
    f = real("x*y*exp(-x*y)")
    scan = radial_stationary_scan(f, (0.5, 0.5))
    assert scan.verdict is Verdict.CONVERGED
    (x, y), = scan.points
    assert abs(x * y - 1.0) <= 1e-6
    rep = classify(f, (x, y))
    assert rep.classification is Classification.MAX
    assert rep.s_max <= 1e-9, rep.s_max
    th = np.array([a.angles[0] for a in rep.profile])
    k = int(np.argmin(np.abs(th - math.pi / 4)))
    assert abs(rep.profile[k].value + 2 / math.e) <= 1e-4
    assert classify(f, (0.0, 0.0)).classification is Classification.SADDLE
    oracle = classify(f, (1.0, 1.0)).hessian_oracle
    assert abs(oracle.discriminant) <= 1e-12 and oracle.verdict is Classification.INCONCLUSIVE


@criterion(6, "conj(z) nowhere differentiable; conj(z) z only at 0; conj(z) z^2 at 0")
def test_criterion_06():
    rng = np.random.default_rng(2024)
    for z0 in rng.uniform(-3, 3, (10, 2)):
        rep = cr_check(cx("conj(z)"), complex(*z0))
        assert rep.verdict is Verdict.NOT_DIFFERENTIABLE
        th = np.array([a.angles[0] for a in rep.per_angle])
        q = np.array([a.value for a in rep.per_angle], dtype=complex)
        assert np.max(np.abs(q - np.exp(-2j * th))) <= 1e-6
    xs = np.linspace(-1, 1, 5)
    hits = [complex(a, b) for a in xs for b in xs
            if cr_check(cx("conj(z)*z"), complex(a, b)).verdict is Verdict.DIFFERENTIABLE]
    assert hits == [0j], hits
    assert abs(cr_check(cx("conj(z)*z"), 0j).derivative) <= 1e-8
    assert cr_check(cx("conj(z)*z^2"), 0j).verdict is Verdict.DIFFERENTIABLE
    assert cr_check(cx("conj(z)"), 0j).verdict is Verdict.NOT_DIFFERENTIABLE


@criterion(7, "second and third derivatives of z^2, z^3, exp(z), 1/(1-z) at 0.3")
def test_criterion_07():
    z = sympy.symbols("z")
    cases = {"z^2": z ** 2, "z^3": z ** 3, "exp(z)": sympy.exp(z), "1/(1-z)": 1 / (1 - z)}
    for text, sym in cases.items():
        for order in (2, 3):
            exact = complex(sympy.diff(sym, z, order).subs(z, 0.3))
            res = higher_derivative(cx(text), 0.3, order)
            assert res.verdict is Verdict.ANALYTIC, (text, order, res.reason)
            assert abs(res.value - exact) <= 1e-4, (text, order, res.value, exact)
            floor = 1e-7 * (1.0 + abs(res.value))
            d = res.differences
            assert all(b <= a or b <= floor for a, b in zip(d[:-1], d[1:])), (text, order, d)


@criterion(8, "Taylor table of exp(xy); radii sqrt(2) for 1/(1+xy) and infinite for exp(xy)")
def test_criterion_08():
    t = taylor_coeffs(real("exp(x*y)"), (0.0, 0.0), 4)
    assert t.a(1, 1) == 1.0 and t.a(2, 2) == 0.5
    p = polar_convergence_probe(real("1/(1+x*y)"), (0.0, 0.0))
    assert abs(p.global_min - math.sqrt(2)) <= 0.05 * math.sqrt(2) and p.global_min >= 1.0
    e = polar_convergence_probe(real("exp(x*y)"), (0.0, 0.0), r_max=10.0)
    assert np.all(np.isinf(e.radius))


@criterion(9, "circles field G = 0 and closed orbit; hyperbolas keep xy and match RK4")
def test_criterion_09():
    P, Q = real("x"), real("y")
    hf = polar_separate(P, Q)
    assert np.all(hf.G(np.linspace(0, 2 * math.pi, 97)) == 0.0)
    sol = solve_polar(hf, 1.0, 0.0, 2 * math.pi)
    pts = sol.points
    assert np.max(np.abs(np.hypot(pts[:, 0], pts[:, 1]) - 1.0)) <= 1e-6
    assert np.max(np.abs(pts[-1] - (1.0, 0.0))) <= 1e-6
    P2, Q2 = real("y"), real("x")
    hyper = solve_polar(polar_separate(P2, Q2), math.sqrt(2), math.pi / 4, 0.6, step=1e-3)
    hp = hyper.points
    assert np.max(np.abs(hp[:, 0] * hp[:, 1] - 1.0)) <= 1e-6
    arc = float(np.trapezoid(hyper.r * np.sqrt(1 + hyper.G ** 2), hyper.thetas))
    x0, y0 = hp[0]
    tx, ty = x0, -y0  # tangent (Q, -P)
    orient = 1.0 if x0 * ty - y0 * tx >= 0 else -1.0
    traj = rk4_oracle(P2, Q2, hp[0], arc, 1e-3, orient)
    theta = np.arctan2(traj.points[:, 1], traj.points[:, 0])
    keep = np.flatnonzero(theta <= hyper.thetas[-1])[::20]
    r_polar = np.array([hyper.r_at(t) for t in theta[keep]])
    assert np.max(np.abs(r_polar - np.hypot(*traj.points[keep].T))) <= 1e-4
    origin = classify_point(P, Q, (0.0, 0.0))
    assert origin.classical_singular and not origin.polar_multi_curve


@criterion(10, "rotation invariance, oracle concordance, coordinate round trip, determinism")
def test_criterion_10():
    # rotation invariance over 100 seeded rotations
    for seed in range(100):
        text, c, _, _ = LIMITS[seed % len(LIMITS)]
        n = len(c)
        R = rotation(n, seed)
        a = radial_limit(real(text, n), c)
        b = radial_limit(compose_linear(real(text, n), R), R.T @ np.asarray(c))
        assert a.verdict == b.verdict, (seed, text)
        if a.verdict is Verdict.EXISTS:
            assert abs(a.value - b.value) <= 2e-6
        text, c, _ = DIFFERENTIABILITY[seed % len(DIFFERENTIABILITY)]
        n = len(c)
        R = rotation(n, seed)
        a = differentiability_check(real(text, n), c)
        b = differentiability_check(compose_linear(real(text, n), R), R.T @ np.asarray(c))
        assert a.verdict == b.verdict, (seed, text)
        if a.verdict is Verdict.DIFFERENTIABLE:
            assert np.max(np.abs(np.asarray(b.gradient) - R.T @ np.asarray(a.gradient))) <= 1e-6
    # engine and oracle never disagree
    for text, c, _, _ in LIMITS:
        f = real(text, len(c))
        rep = radial_limit(f, c)
        L = rep.value if rep.verdict is Verdict.EXISTS else \
            float(np.mean([v.value for v in rep.per_angle if v.value is not None]))
        sweep = uniform_limit_oracle(f, c, float(L))
        assert (rep.verdict is Verdict.EXISTS) == (sweep.verdict is Verdict.UNIFORM), text
    for text, c, _ in DIFFERENTIABILITY:
        f = real(text, len(c))
        rep = differentiability_check(f, c)
        if rep.verdict is Verdict.DIFFERENTIABLE:
            assert np.max(np.abs(np.asarray(rep.gradient) - fd_gradient(f, c))) <= 1e-6, text
    # coordinate round trip
    rng = np.random.default_rng(10)
    for n in range(2, 7):
        for _ in range(200):
            p, c = rng.uniform(-10, 10, n), rng.uniform(-10, 10, n)
            scale = max(1.0, np.max(np.abs(p)), np.max(np.abs(c)))
            assert np.max(np.abs(to_cartesian(from_cartesian(p, c)) - p)) <= 1e-12 * scale
    # byte-identical reruns
    cmd = [sys.executable, "-m", "radialcheck", "limit", "x*y/(x^2+y^2)", "--point", "0,0",
           "--with-oracle"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and first
