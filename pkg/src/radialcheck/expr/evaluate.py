"""Vectorised evaluation of expression trees.

Evaluation never raises for finite inputs: failures surface as nan
(undefined) or inf (infinite) in the result and are reported through a
status code per point.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Sequence, Tuple

import numpy as np

from . import quaternion as qt
from .tree import BINARY, COMPLEX, CONSTANT, POWER, QUATERNION, REAL, UNARY, VARIABLE, Expr

FINITE, UNDEFINED, INFINITE = 0, 1, 2


class Status(str, enum.Enum):
    FINITE = "finite"
    UNDEFINED = "undefined"
    INFINITE = "infinite"


_STATUS_BY_CODE = {FINITE: Status.FINITE, UNDEFINED: Status.UNDEFINED, INFINITE: Status.INFINITE}


@dataclass(frozen=True)
class EvalValue:
    """Outcome of evaluating an expression at one point.

    ``payload`` is a float, complex, :class:`Quaternion` or (for vector-valued
    functions) a tuple of floats; it is meaningful only when ``status`` is
    finite.
    """

    payload: Any
    status: Status

    @property
    def ok(self) -> bool:
        return self.status is Status.FINITE


def _integer_exponent(node: Expr):
    if node.kind == CONSTANT and isinstance(node.literal, float) and node.literal.is_integer():
        n = int(node.literal)
        if abs(n) <= 64:
            return n
    return None


class RealAlgebra:
    mode = REAL

    def const(self, lit):
        return np.float64(lit)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def div(self, a, b):
        return np.true_divide(a, b)

    def neg(self, a):
        return -a

    def pow(self, a, b, n):
        if n is not None:
            return np.power(a, float(n))
        return np.power(a, b)

    def func(self, name, a):
        if name == "log":
            a = np.asarray(a, dtype=float)
            return np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), np.nan)
        return _REAL_FUNCS[name](a)


_REAL_FUNCS = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "tan": np.tan,
               "sqrt": np.sqrt, "abs": np.abs}


class ComplexAlgebra:
    mode = COMPLEX

    def const(self, lit):
        return np.complex128(lit)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def div(self, a, b):
        a, b = np.broadcast_arrays(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
        zero = b == 0
        safe = np.where(zero, 1.0, b)
        out = a / safe
        return np.where(zero, np.where(a == 0, complex(np.nan, np.nan), complex(np.inf, 0.0)), out)

    def neg(self, a):
        return -a

    def pow(self, a, b, n):
        if n is not None:
            return _int_power(self, np.asarray(a, dtype=complex), n, np.complex128(1.0))
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        zero = a == 0
        logs = np.log(np.where(zero, 1.0, a))
        out = np.exp(b * logs)
        return np.where(zero, np.where(b.real > 0, 0.0, complex(np.nan, np.nan)), out)

    def func(self, name, a):
        a = np.asarray(a, dtype=complex)
        if name == "log":
            return np.where(a == 0, complex(np.nan, np.nan), np.log(np.where(a == 0, 1.0, a)))
        if name == "abs":
            return np.abs(a).astype(complex)
        if name == "re":
            return a.real.astype(complex)
        if name == "im":
            return a.imag.astype(complex)
        if name == "conj":
            return np.conj(a)
        return _COMPLEX_FUNCS[name](a)


_COMPLEX_FUNCS = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "tan": np.tan, "sqrt": np.sqrt}


def _int_power(alg, a, n, one):
    if n < 0:
        return alg.div(one, _int_power(alg, a, -n, one))
    result = np.ones_like(a) * one
    base = a
    while n:
        if n & 1:
            result = alg.mul(result, base)
        n >>= 1
        if n:
            base = alg.mul(base, base)
    return result


class QuaternionAlgebra:
    mode = QUATERNION

    def const(self, lit):
        return qt.as_qarray(lit)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return qt.qmul(a, b)

    def div(self, a, b):
        return qt.qdiv(a, b)

    def neg(self, a):
        return -a

    def pow(self, a, b, n):
        if n is not None:
            return qt.qpow_int(a, n)
        a, b = np.broadcast_arrays(a, b)
        zero = qt.qnorm2(a) == 0
        out = qt.qexp(qt.qmul(qt.qlog(np.where(zero[..., None], 1.0, a)), b))
        return np.where(zero[..., None], np.where((b[..., 0] > 0)[..., None], 0.0, np.nan), out)

    def func(self, name, a):
        a = np.asarray(a, dtype=float)
        zeros = np.zeros_like(a)
        if name == "exp":
            return qt.qexp(a)
        if name == "log":
            return qt.qlog(a)
        if name == "sin":
            return qt.qsin(a)
        if name == "cos":
            return qt.qcos(a)
        if name == "tan":
            return qt.qdiv(qt.qsin(a), qt.qcos(a))
        if name == "sqrt":
            zero = qt.qnorm2(a) == 0
            root = qt.qexp(0.5 * qt.qlog(np.where(zero[..., None], 1.0, a)))
            return np.where(zero[..., None], 0.0, root)
        if name == "abs":
            zeros[..., 0] = qt.qnorm(a)
            return zeros
        if name == "re":
            zeros[..., 0] = a[..., 0]
            return zeros
        if name == "im":
            zeros[..., 1:] = a[..., 1:]
            return zeros
        if name == "conj":
            return qt.qconj(a)
        raise ValueError(f"unknown function {name}")


ALGEBRAS = {REAL: RealAlgebra(), COMPLEX: ComplexAlgebra(), QUATERNION: QuaternionAlgebra()}


def eval_tree(e: Expr, env: Sequence[Any], alg) -> Any:
    """Evaluate ``e`` with variable values ``env`` (index i -> env[i-1]) in ``alg``."""
    kind = e.kind
    if kind == CONSTANT:
        return alg.const(e.literal)
    if kind == VARIABLE:
        return env[e.index - 1]
    if kind == UNARY:
        a = eval_tree(e.children[0], env, alg)
        if e.func == "neg":
            return alg.neg(a)
        return alg.func(e.func, a)
    a = eval_tree(e.children[0], env, alg)
    if kind == POWER:
        n = _integer_exponent(e.children[1])
        b = None if n is not None else eval_tree(e.children[1], env, alg)
        return alg.pow(a, b, n)
    b = eval_tree(e.children[1], env, alg)
    if kind == BINARY:
        return {"+": alg.add, "-": alg.sub, "*": alg.mul, "/": alg.div}[e.func](a, b)
    raise ValueError(f"bad node {kind}")


def status_codes(values: np.ndarray, mode: str) -> np.ndarray:
    values = np.asarray(values)
    if mode == QUATERNION:
        nan = np.any(np.isnan(values), axis=-1)
        inf = np.any(np.isinf(values), axis=-1)
    elif mode == COMPLEX:
        nan = np.isnan(values.real) | np.isnan(values.imag)
        inf = np.isinf(values.real) | np.isinf(values.imag)
    else:
        nan = np.isnan(values)
        inf = np.isinf(values)
    codes = np.full(nan.shape, FINITE, dtype=np.int8)
    codes[inf] = INFINITE
    codes[nan] = UNDEFINED
    return codes


def _environment(f: Expr, points) -> Tuple[list, tuple]:
    if f.mode == REAL:
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != f.arity:
            raise ValueError(f"point arity {pts.shape[-1]} does not match expression arity {f.arity}")
        return [pts[..., i] for i in range(f.arity)], pts.shape[:-1]
    if f.mode == COMPLEX:
        pts = np.asarray(points, dtype=complex)
        return [pts], pts.shape
    pts = qt.as_qarray(points)
    return [pts], pts.shape[:-1]


def evaluate_many(f: Expr, points) -> Tuple[np.ndarray, np.ndarray]:
    """Evaluate ``f`` over an array of points.

    Real mode takes shape ``(..., N)``, complex mode ``(...)`` complex, and
    quaternion mode ``(..., 4)``. Returns ``(values, status_codes)``.
    """
    env, shape = _environment(f, points)
    alg = ALGEBRAS[f.mode]
    with np.errstate(all="ignore"):
        values = eval_tree(f, env, alg)
        if f.mode == QUATERNION:
            values = np.broadcast_to(values, shape + (4,)).astype(float)
        else:
            dtype = complex if f.mode == COMPLEX else float
            values = np.broadcast_to(np.asarray(values, dtype=dtype), shape).copy()
    return values, status_codes(values, f.mode)


def evaluate(f: Expr, p) -> EvalValue:
    """Evaluate ``f`` at a single point."""
    if f.mode == REAL:
        p = np.atleast_1d(np.asarray(p, dtype=float))
    values, codes = evaluate_many(f, p)
    code = int(codes) if np.ndim(codes) == 0 else int(codes.reshape(-1)[0])
    status = _STATUS_BY_CODE[code]
    if f.mode == QUATERNION:
        payload = qt.Quaternion.from_array(values.reshape(4))
    elif f.mode == COMPLEX:
        payload = complex(values)
    else:
        payload = float(values)
    return EvalValue(payload, status)


def evaluate_vector(fs: Sequence[Expr], p) -> EvalValue:
    """Evaluate a vector-valued function given as one expression per component."""
    parts = [evaluate(f, p) for f in fs]
    if all(v.ok for v in parts):
        return EvalValue(tuple(v.payload for v in parts), Status.FINITE)
    worst = Status.UNDEFINED if any(v.status is Status.UNDEFINED for v in parts) else Status.INFINITE
    return EvalValue(tuple(v.payload for v in parts), worst)


def underflows(f: Expr, p) -> bool:
    """Whether evaluating ``f`` at the single point ``p`` underflows.

    Gradual underflow loses relative precision, so a finite value computed
    through subnormal intermediates may be far from the true value.
    """
    env, _ = _environment(f, np.atleast_1d(np.asarray(p)) if f.mode == REAL else p)
    with np.errstate(under="raise", over="ignore", divide="ignore", invalid="ignore"):
        try:
            eval_tree(f, env, ALGEBRAS[f.mode])
        except FloatingPointError:
            return True
    return False
