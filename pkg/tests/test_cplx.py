import cmath
import math

import numpy as np
import pytest
import sympy

from radialcheck import Verdict
from radialcheck.cplx import (HigherDerivConfig, cr_check, derivative_continuity_probe,
                              higher_derivative, quat_diff_check)
from radialcheck.expr import parse


def cx(text):
    return parse(text, "complex")


def qt(text):
    return parse(text, "quaternion")


def _q_values(rep):
    th = np.array([a.angles[0] for a in rep.per_angle])
    q = np.array([complex(*a.value) if isinstance(a.value, tuple) else a.value
                  for a in rep.per_angle])
    return th, q


@pytest.mark.parametrize("seed", range(10))
def test_conj_nowhere_differentiable(seed):
    z0 = complex(*np.random.default_rng(seed).uniform(-3, 3, 2))
    rep = cr_check(cx("conj(z)"), z0)
    assert rep.verdict is Verdict.NOT_DIFFERENTIABLE and rep.derivative is None
    th, q = _q_values(rep)
    assert np.max(np.abs(q - np.exp(-2j * th))) <= 1e-6


def test_conj_times_z_only_at_origin():
    xs = np.linspace(-1, 1, 5)
    points = [complex(a, b) for a in xs for b in xs]
    flags = {z: cr_check(cx("conj(z)*z"), z).verdict is Verdict.DIFFERENTIABLE for z in points}
    assert [z for z, ok in flags.items() if ok] == [0j]
    rep = cr_check(cx("conj(z)*z"), 0j)
    assert abs(rep.derivative) <= 1e-8 and rep.pr_exists and rep.qr_exists


def test_integer_power_cases():
    assert cr_check(cx("conj(z)*z^2"), 0j).verdict is Verdict.DIFFERENTIABLE
    assert cr_check(cx("conj(z)"), 0j).verdict is Verdict.NOT_DIFFERENTIABLE


def test_z_squared_derivative():
    rep = cr_check(cx("z^2"), 3 + 0j)
    assert rep.verdict is Verdict.DIFFERENTIABLE
    assert abs(rep.derivative - 6) <= 1e-6


@pytest.mark.parametrize("seed", range(20))
def test_polynomials_match_symbolic_derivative(seed):
    rng = np.random.default_rng(50 + seed)
    coeffs = rng.integers(-3, 4, size=4)
    z = sympy.symbols("z")
    poly = sum(int(c) * z ** k for k, c in enumerate(coeffs))
    f = cx(" + ".join(f"({int(c)})*z^{k}" for k, c in enumerate(coeffs)))
    z0 = complex(*rng.uniform(-2, 2, 2))
    rep = cr_check(f, z0)
    assert rep.verdict is Verdict.DIFFERENTIABLE
    exact = complex(sympy.diff(poly, z).subs(z, z0))
    assert abs(rep.derivative - exact) <= 1e-6


def test_constant_function():
    rep = cr_check(cx("2+3*i"), 1j)
    assert rep.verdict is Verdict.DIFFERENTIABLE and abs(rep.derivative) <= 1e-12


def test_undefined_at_pole():
    assert cr_check(cx("1/z"), 0j).verdict is Verdict.UNDEFINED


def test_continuity_probe():
    rep = derivative_continuity_probe(cx("conj(z)*z^2"), 0j, 1.0, 16)
    first = rep.samples[0]
    assert first.z == 0 and first.verdict is Verdict.DIFFERENTIABLE and abs(first.derivative) <= 1e-8
    assert derivative_continuity_probe(cx("conj(z)"), 0j, 1.0, 16).n_differentiable == 0
    coarse = derivative_continuity_probe(cx("z^3"), 0j, 1.0, 16)
    fine = derivative_continuity_probe(cx("z^3"), 0j, 1.0, 64)
    assert coarse.all_differentiable and fine.all_differentiable
    assert fine.max_jump < coarse.max_jump


def test_continuity_probe_sample_floor():
    with pytest.raises(ValueError):
        derivative_continuity_probe(cx("z"), 0j, 1.0, 4)


_ANALYTIC = {"z^2": lambda z: z ** 2, "z^3": lambda z: z ** 3, "exp(z)": sympy.exp,
             "1/(1-z)": lambda z: 1 / (1 - z)}


@pytest.mark.parametrize("text", sorted(_ANALYTIC))
@pytest.mark.parametrize("order", [2, 3])
def test_higher_derivatives_match_symbolic(text, order):
    z = sympy.symbols("z")
    exact = complex(sympy.diff(_ANALYTIC[text](z), z, order).subs(z, 0.3))
    res = higher_derivative(cx(text), 0.3, order)
    assert res.verdict is Verdict.ANALYTIC
    assert abs(res.value - exact) <= 1e-4
    floor = 1e-7 * (1 + abs(res.value))
    d = res.differences
    assert all(b <= a or b <= floor for a, b in zip(d[:-1], d[1:]))


@pytest.mark.parametrize("text, z0, order, expected", [
    ("z^3", 1 + 1j, 2, 6 * (1 + 1j)),
    ("exp(z)", 0j, 3, 1.0),
    ("5", 2j, 2, 0.0),
])
def test_higher_derivative_examples(text, z0, order, expected):
    res = higher_derivative(cx(text), z0, order)
    assert abs(res.value - expected) <= 1e-4


def test_higher_derivative_rejects_non_analytic():
    assert higher_derivative(cx("conj(z)"), 0.5, 2).verdict is Verdict.NOT_ANALYTIC


def test_higher_config_positive_radii():
    offs = HigherDerivConfig().offsets()
    assert np.all(np.abs(offs) > 0)
    with pytest.raises(ValueError):
        HigherDerivConfig(r0=0.0)


@pytest.mark.parametrize("side", ["left", "right"])
def test_quaternion_identity(side):
    rep = quat_diff_check(qt("h"), (0.3, -1.0, 0.5, 2.0), side)
    assert rep.verdict is Verdict.DIFFERENTIABLE
    np.testing.assert_allclose(rep.derivative.array, (1, 0, 0, 0), atol=1e-9)


@pytest.mark.parametrize("side", ["left", "right"])
def test_quaternion_square_at_zero(side):
    rep = quat_diff_check(qt("h^2"), (0, 0, 0, 0), side)
    assert rep.verdict is Verdict.DIFFERENTIABLE
    np.testing.assert_allclose(rep.derivative.array, 0, atol=1e-9)


@pytest.mark.parametrize("side", ["left", "right"])
def test_quaternion_square_at_real_point(side):
    rep = quat_diff_check(qt("h^2"), (1.5, 0, 0, 0), side)
    assert rep.verdict is Verdict.DIFFERENTIABLE
    np.testing.assert_allclose(rep.derivative.array, (3.0, 0, 0, 0), atol=1e-6)


def test_quaternion_square_at_i_is_direction_dependent():
    rep = quat_diff_check(qt("h^2"), (0, 1, 0, 0), "left")
    assert rep.verdict is Verdict.NOT_DIFFERENTIABLE


def test_quaternion_sides_differ():
    # h*i: the left quotient u^-1 (u i) is the constant i, the right one is u i u^-1
    left = quat_diff_check(qt("h*i"), (0, 0, 0, 0), "left")
    right = quat_diff_check(qt("h*i"), (0, 0, 0, 0), "right")
    assert left.verdict is Verdict.DIFFERENTIABLE and right.verdict is Verdict.NOT_DIFFERENTIABLE
    np.testing.assert_allclose(left.derivative.array, (0, 1, 0, 0), atol=1e-9)
