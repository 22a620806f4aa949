"""Truncated multivariate Taylor jets for forward-mode differentiation.

A :class:`Jet` stores Taylor coefficients (not derivatives) of a function
around a point. Its coefficient array has shape ``box + batch``: ``box`` holds
one axis per variable (length = max order in that variable + 1) and the
trailing ``batch`` axes let many expansion points be processed at once.
Monomials whose total degree exceeds ``max_total`` are discarded.

Elementary functions are applied by composing their univariate Taylor
series with the non-constant part of the argument, so every supported
function works to any truncation order.
"""

from __future__ import annotations

import math
from typing import Sequence, Tuple

import numpy as np

from .tree import BINARY, CONSTANT, POWER, REAL, UNARY, VARIABLE, Expr

MAX_TOTAL_ORDER = 8


class Jet:
    __slots__ = ("coef", "box", "max_total")

    def __init__(self, coef: np.ndarray, box: Tuple[int, ...], max_total: int):
        self.coef = coef
        self.box = box
        self.max_total = max_total

    # -- construction ------------------------------------------------------
    @classmethod
    def constant(cls, value, box, max_total, batch=()):
        coef = np.zeros(box + tuple(batch))
        coef[(0,) * len(box)] = value
        return cls(coef, box, max_total)

    @property
    def batch(self):
        return self.coef.shape[len(self.box):]

    @property
    def value(self) -> np.ndarray:
        return self.coef[(0,) * len(self.box)]

    def _like(self, coef):
        return Jet(coef, self.box, self.max_total)

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(np.asarray(other, dtype=float), self.box, self.max_total, self.batch)

    # -- ring operations -----------------------------------------------
    def __add__(self, other):
        other = self._lift(other)
        return self._like(self.coef + other.coef)

    def __sub__(self, other):
        other = self._lift(other)
        return self._like(self.coef - other.coef)

    def __neg__(self):
        return self._like(-self.coef)

    def scale(self, s):
        return self._like(self.coef * s)

    def __mul__(self, other):
        other = self._lift(other)
        return self._like(_truncated_product(self.coef, other.coef, self.box, self.max_total))

    def nonconstant(self):
        """The jet minus its constant term."""
        coef = self.coef.copy()
        coef[(0,) * len(self.box)] = 0.0
        return self._like(coef)

    def compose(self, series: Sequence[np.ndarray], delta: "Jet") -> "Jet":
        """Evaluate ``sum_n series[n] * delta**n`` by Horner's scheme."""
        acc = Jet.constant(series[-1], self.box, self.max_total, self.batch)
        for c in reversed(series[:-1]):
            acc = acc * delta + c
        return acc

    @property
    def order(self) -> int:
        return self.max_total


def total_degree_mask(box: Tuple[int, ...], max_total: int) -> np.ndarray:
    grids = np.indices(box)
    return grids.sum(axis=0) <= max_total


def _truncated_product(a: np.ndarray, b: np.ndarray, box, max_total) -> np.ndarray:
    nbox = len(box)
    a, b = np.broadcast_arrays(a, b)
    if nbox == 1:
        k = box[0]
        # Toeplitz gather: out[n] = sum_i a[i] * b[n - i]
        n = np.arange(k)[:, None]
        i = np.arange(k)[None, :]
        idx = n - i
        valid = idx >= 0
        bt = b[np.where(valid, idx, 0)]
        weights = valid.reshape(valid.shape + (1,) * (b.ndim - 1))
        bt = np.where(weights, bt, 0.0)
        with np.errstate(invalid="ignore"):
            out = np.einsum("ni...,i...->n...", bt, a)
        out[max_total + 1:] = 0.0
        return out
    out = np.zeros(a.shape)
    # zero rows may only be skipped when they cannot meet an inf/nan
    skip_zeros = bool(np.all(np.isfinite(b)))
    for idx in np.ndindex(*box):
        if sum(idx) > max_total:
            continue
        ai = a[idx]
        if skip_zeros and not np.any(ai):
            continue
        dst = tuple(slice(j, None) for j in idx)
        src = tuple(slice(0, box[d] - j) for d, j in enumerate(idx))
        out[dst] += ai * b[src]
    mask = total_degree_mask(box, max_total)
    mask = mask.reshape(mask.shape + (1,) * (a.ndim - nbox))
    return np.where(mask, out, 0.0)


# -- elementary functions ---------------------------------------------------

def _series_exp(u0, n):
    e = np.exp(u0)
    return [e / math.factorial(k) for k in range(n + 1)]


def jet_exp(u: Jet) -> Jet:
    return u.compose(_series_exp(u.value, u.order), u.nonconstant())


def _ratio(u: Jet) -> Jet:
    """Non-constant part of ``u`` divided by its constant term.

    Exactly-zero coefficients stay zero, so a function that is constant
    along the jet directions does not pick up 0/0 from a vanishing base.
    """
    d = u.nonconstant().coef
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(d == 0, 0.0, d / u.value)
    return u._like(q)


def jet_recip(u: Jet) -> Jet:
    u0 = u.value
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / u0
    eps = _ratio(u)
    series = [inv * (-1.0) ** k for k in range(u.order + 1)]
    return u.compose(series, eps)


def jet_div(a: Jet, b: Jet) -> Jet:
    return a * jet_recip(b)


def jet_log(u: Jet) -> Jet:
    u0 = u.value
    with np.errstate(divide="ignore", invalid="ignore"):
        head = np.where(u0 > 0, np.log(np.where(u0 > 0, u0, 1.0)), np.nan)
    eps = _ratio(u)
    series = [head] + [np.full_like(head, (-1.0) ** (k + 1) / k) for k in range(1, u.order + 1)]
    return u.compose(series, eps)


def jet_pow_real(u: Jet, a: float) -> Jet:
    """``u ** a`` for a real constant exponent via the binomial series."""
    u0 = u.value
    with np.errstate(divide="ignore", invalid="ignore"):
        head = np.power(u0, a)
    eps = _ratio(u)
    coeffs = [1.0]
    for k in range(1, u.order + 1):
        coeffs.append(coeffs[-1] * (a - k + 1) / k)
    series = [head * c for c in coeffs]
    return u.compose(series, eps)


def jet_pow_int(u: Jet, n: int) -> Jet:
    if n < 0:
        return jet_recip(jet_pow_int(u, -n))
    result = u._lift(1.0)
    base = u
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def _trig_series(u0, n, phase):
    # d^k/dx^k sin(x) = sin(x + k*pi/2); cos is sin shifted by one step
    s, c = np.sin(u0), np.cos(u0)
    cycle = [s, c, -s, -c]
    return [cycle[(k + phase) % 4] / math.factorial(k) for k in range(n + 1)]


def jet_sin(u: Jet) -> Jet:
    return u.compose(_trig_series(u.value, u.order, 0), u.nonconstant())


def jet_cos(u: Jet) -> Jet:
    return u.compose(_trig_series(u.value, u.order, 1), u.nonconstant())


def jet_abs(u: Jet) -> Jet:
    u0 = u.value
    sign = np.sign(u0)
    out = u.scale(sign)
    if u.order >= 1:
        # |u| has no Taylor expansion where u vanishes
        nbox = len(u.box)
        hole = (u0 == 0) & np.any(u.nonconstant().coef != 0, axis=tuple(range(nbox)))
        if np.any(hole):
            higher = np.ones(u.box, dtype=bool)
            higher[(0,) * nbox] = False
            higher = higher.reshape(u.box + (1,) * (u.coef.ndim - nbox))
            out = u._like(np.where(higher & hole, np.nan, out.coef))
    return out


_JET_FUNCS = {
    "exp": jet_exp,
    "log": jet_log,
    "sin": jet_sin,
    "cos": jet_cos,
    "tan": lambda u: jet_div(jet_sin(u), jet_cos(u)),
    "sqrt": lambda u: jet_pow_real(u, 0.5),
    "abs": jet_abs,
}


def _constant_exponent(node: Expr):
    if node.kind == CONSTANT:
        return float(node.literal)
    if node.kind == UNARY and node.func == "neg" and node.children[0].kind == CONSTANT:
        return -float(node.children[0].literal)
    return None


def eval_jet(e: Expr, env: Sequence[Jet]) -> Jet:
    """Evaluate a real-mode tree on jets; ``env[i-1]`` seeds variable ``i``."""
    proto = env[0]
    kind = e.kind
    if kind == CONSTANT:
        return proto._lift(float(e.literal))
    if kind == VARIABLE:
        return env[e.index - 1]
    if kind == UNARY:
        a = eval_jet(e.children[0], env)
        if e.func == "neg":
            return -a
        return _JET_FUNCS[e.func](a)
    a = eval_jet(e.children[0], env)
    if kind == POWER:
        k = _constant_exponent(e.children[1])
        if k is not None and k.is_integer() and abs(k) <= 64:
            return jet_pow_int(a, int(k))
        if k is not None:
            with np.errstate(invalid="ignore"):
                return jet_pow_real(a, k)
        b = eval_jet(e.children[1], env)
        return jet_exp(b * jet_log(a))
    b = eval_jet(e.children[1], env)
    if e.func == "+":
        return a + b
    if e.func == "-":
        return a - b
    if e.func == "*":
        return a * b
    if e.func == "/":
        return jet_div(a, b)
    raise ValueError(f"bad node {kind}")


def seed_point(point, box: Tuple[int, ...], max_total: int) -> list:
    """Jets for ``x_i = p_i + dx_i`` at a single point (or batch of points).

    ``point`` has shape ``(N,)`` or ``(N, *batch)``.
    """
    point = np.asarray(point, dtype=float)
    batch = point.shape[1:]
    env = []
    for i, p in enumerate(point):
        j = Jet.constant(p, box, max_total, batch)
        if box[i] > 1 and max_total >= 1:
            unit = [0] * len(box)
            unit[i] = 1
            j.coef[tuple(unit)] = 1.0
        env.append(j)
    return env


def seed_ray(base, direction, degree: int) -> list:
    """Univariate jets for ``x = base + t * direction``.

    ``base`` and ``direction`` have shape ``(N, *batch)`` (broadcastable).
    """
    base, direction = np.broadcast_arrays(np.asarray(base, dtype=float),
                                          np.asarray(direction, dtype=float))
    batch = base.shape[1:]
    env = []
    for b, d in zip(base, direction):
        coef = np.zeros((degree + 1,) + batch)
        coef[0] = b
        if degree >= 1:
            coef[1] = d
        env.append(Jet(coef, (degree + 1,), degree))
    return env


def jet_expand(f: Expr, point, box: Tuple[int, ...], max_total: int) -> Jet:
    if f.mode != REAL:
        raise ValueError("jets are available in real mode only")
    with np.errstate(all="ignore"):
        return eval_jet(f, seed_point(point, box, max_total))


def ray_coefficients(f: Expr, base, direction, degree: int) -> np.ndarray:
    """Taylor coefficients of ``t -> f(base + t*direction)`` at t = 0.

    Returns an array of shape ``(degree + 1, *batch)``.
    """
    if f.mode != REAL:
        raise ValueError("jets are available in real mode only")
    with np.errstate(all="ignore"):
        env = seed_ray(base, direction, degree)
        return eval_jet(f, env).coef
