import math

import numpy as np
import pytest

from corpus import DIFFERENTIABILITY, LIMITS
from radialcheck import RadialConfig, Verdict, differentiability_check, radial_limit
from radialcheck.expr import binary, compose_linear, const, parse, partial_at, power, unary, var
from radialcheck.extrema import radial_stationary_scan
from radialcheck.oracle import fd_gradient, fd_partial, grid_extrema_oracle, uniform_limit_oracle


def real(text, n=2):
    return parse(text, "real", n)


def test_sweep_quartic_ratio_quarter_r_squared():
    sweep = uniform_limit_oracle(real("x^2*y^2/(x^2+y^2)"), (0.0, 0.0), 0.0)
    assert sweep.verdict is Verdict.UNIFORM
    np.testing.assert_allclose(sweep.sup, sweep.radii ** 2 / 4, rtol=1e-12)
    assert np.all(np.diff(sweep.sup) < 0)


def test_sweep_sin_cos_stays_at_half():
    sweep = uniform_limit_oracle(real("x*y/(x^2+y^2)"), (0.0, 0.0), 0.0)
    assert sweep.verdict is Verdict.NOT_UNIFORM
    np.testing.assert_allclose(sweep.sup, 0.5, atol=1e-12)


def test_sweep_constant():
    sweep = uniform_limit_oracle(real("4"), (1.0, 1.0), 4.0)
    assert sweep.verdict is Verdict.UNIFORM and np.all(sweep.sup == 0)


def test_sweep_uses_denser_grid():
    assert uniform_limit_oracle(real("x"), (0.0, 0.0), 0.0).n_directions == 8 * 64


@pytest.mark.parametrize("text, p, alpha, expected, tol", [
    ("sqrt(x*y)", (1.0, 1.0), (1, 0), 0.5, 1e-7),
    ("x", (0.3, 0.1), (0, 1), 0.0, 1e-12),
    ("exp(x*y)", (1.0, 1.0), (1, 1), 2 * math.e, 1e-5),
])
def test_fd_partial_examples(text, p, alpha, expected, tol):
    assert abs(fd_partial(real(text), p, alpha) - expected) <= tol


def test_fd_partial_undefined_in_stencil():
    assert math.isnan(fd_partial(real("sqrt(x*y)"), (0.0, 0.0), (1, 1)))
    assert math.isnan(fd_partial(real("sqrt(x)+y"), (0.0, 0.0), (1, 0)))


def test_fd_partial_order_cap():
    with pytest.raises(ValueError):
        fd_partial(real("x"), (0.0, 0.0), (3, 2))


@pytest.mark.parametrize("text", ["sin(x)*exp(y)", "log(2+x^2+y)", "x^3*y^2-x*y", "cos(x*y)/(2+x)"])
@pytest.mark.parametrize("alpha", [(1, 0), (0, 1), (2, 0), (1, 1), (2, 2), (1, 3)])
def test_fd_matches_jets(text, alpha):
    f, p = real(text), (0.4, -0.3)
    exact = partial_at(f, p, alpha).payload
    assert fd_partial(f, p, alpha) == pytest.approx(exact, rel=1e-6, abs=1e-6)


def test_grid_single_minimum():
    res = grid_extrema_oracle(real("x^2+y^2"), [(-1, 1), (-1, 1)])
    assert len(res.cells) == 1
    cell = res.cells[0]
    assert all(lo <= 0 <= hi for lo, hi in zip(cell.lower, cell.upper))


def test_grid_traces_hyperbola():
    res = grid_extrema_oracle(real("x*y*exp(-x*y)"), [(0.2, 3), (0.2, 3)])
    assert len(res.cells) > 20
    width = 2.8 / 51
    for cell in res.cells:
        x, y = cell.center
        assert abs(x * y - 1.0) <= 3 * width * max(x, y)


def test_grid_no_cells_for_linear():
    assert grid_extrema_oracle(real("x+y"), [(-1, 1), (-1, 1)]).cells == []


def test_grid_resolution_cap():
    with pytest.raises(ValueError):
        grid_extrema_oracle(real("x"), [(0, 1), (0, 1)], resolution=513)


# -- concordance on the full corpus -----------------------------------------------

@pytest.mark.parametrize("text, c, exists, value", LIMITS)
def test_limit_concordance(text, c, exists, value):
    f = real(text, len(c))
    rep = radial_limit(f, c)
    if rep.verdict is Verdict.EXISTS:
        L = float(rep.value)
    else:
        L = float(np.mean([a.value for a in rep.per_angle if a.value is not None]))
    sweep = uniform_limit_oracle(f, c, L)
    assert (rep.verdict is Verdict.EXISTS) == (sweep.verdict is Verdict.UNIFORM)


def _remainder(f, c, grad):
    """``(f(c + x) - f(c) - grad . x) / |x|`` as an expression in the offset ``x``."""
    n = len(c)
    shifted = compose_linear(f, np.eye(n), c)
    f0 = float(np.nan_to_num(partial_at(f, c, (0,) * n).payload))
    lin = const(-f0, "real", n)
    for i, g in enumerate(grad):
        lin = binary("-", lin, binary("*", const(float(g), "real", n), var(i + 1, "real", n)))
    norm2 = const(0.0, "real", n)
    for i in range(n):
        norm2 = binary("+", norm2, power(var(i + 1, "real", n), const(2.0, "real", n)))
    return binary("/", binary("+", shifted, lin), unary("sqrt", norm2))


@pytest.mark.parametrize("text, c, diff", DIFFERENTIABILITY)
def test_differentiability_concordance(text, c, diff):
    f = real(text, len(c))
    rep = differentiability_check(f, c)
    grad = np.nan_to_num(np.asarray(rep.gradient, dtype=float))
    sweep = uniform_limit_oracle(_remainder(f, c, grad), (0.0,) * len(c), 0.0)
    assert (rep.verdict is Verdict.DIFFERENTIABLE) == (sweep.verdict is Verdict.UNIFORM)
    if rep.verdict is Verdict.DIFFERENTIABLE:
        np.testing.assert_allclose(rep.gradient, fd_gradient(f, c), atol=1e-6)


@pytest.mark.parametrize("text, box, starts", [
    ("x*y*exp(-x*y)", [(0.2, 3), (0.2, 3)], [(0.5, 0.5), (2.0, 0.3), (0.4, 2.1)]),
    ("x^2+y^2", [(-1, 1), (-1, 1)], [(0.7, -0.4)]),
    ("(x-0.5)^2-(y+0.25)^2", [(-1, 1), (-1, 1)], [(0.1, -0.25)]),
])
def test_extrema_concordance(text, box, starts):
    f = real(text)
    res = radial_stationary_scan(f, starts)
    grid = grid_extrema_oracle(f, box)
    assert res.points
    for p in res.points:
        assert any(all(lo - 1e-9 <= x <= hi + 1e-9 for x, lo, hi in zip(p, cell.lower, cell.upper))
                   or np.max(np.abs(np.subtract(p, cell.center))) <= 2.8 / 51
                   for cell in grid.cells)
