"""Expression front end: parsing, evaluation and exact partial derivatives."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .evaluate import (FINITE, INFINITE, UNDEFINED, EvalValue, Status, evaluate,
                       evaluate_many, evaluate_vector, status_codes, underflows)
from .jets import MAX_TOTAL_ORDER, Jet, jet_expand, ray_coefficients
from .parser import (ExprError, ExprSyntaxError, ModeMismatchError, UnknownIdentifierError,
                     parse, tokenize)
from .quaternion import Quaternion
from .tree import (BINARY, COMPLEX, CONSTANT, POWER, QUATERNION, REAL, UNARY, VARIABLE, Expr,
                   binary, const, power, to_text, unary, var)

__all__ = [
    "Expr", "EvalValue", "Status", "Quaternion", "parse", "to_text", "evaluate",
    "evaluate_many", "evaluate_vector", "partial_at", "taylor_jet", "ray_coefficients",
    "substitute", "compose_linear", "ExprError", "ExprSyntaxError", "ModeMismatchError",
    "UnknownIdentifierError", "REAL", "COMPLEX", "QUATERNION", "MAX_TOTAL_ORDER",
    "FINITE", "UNDEFINED", "INFINITE", "status_codes", "tokenize", "underflows",
]


def _status_of(x: float) -> Status:
    if math.isnan(x):
        return Status.UNDEFINED
    if math.isinf(x):
        return Status.INFINITE
    return Status.FINITE


def partial_at(f: Expr, p: Sequence[float], multi_index: Sequence[int]) -> EvalValue:
    """Exact mixed partial derivative of ``f`` at ``p``.

    ``multi_index[i]`` is the derivative order in variable ``i+1``. The
    result comes from a truncated Taylor jet, so it is exact up to floating
    point rounding rather than a difference quotient.
    """
    if f.mode != REAL:
        raise ValueError("partial_at needs a real-mode expression")
    alpha = tuple(int(a) for a in multi_index)
    if len(alpha) != f.arity or len(p) != f.arity:
        raise ValueError("point and multi-index must match the expression arity")
    if any(a < 0 for a in alpha):
        raise ValueError("derivative orders must be nonnegative")
    total = sum(alpha)
    if total > MAX_TOTAL_ORDER:
        raise ValueError(f"total derivative order {total} exceeds {MAX_TOTAL_ORDER}")
    box = tuple(a + 1 for a in alpha)
    jet = jet_expand(f, np.asarray(p, dtype=float), box, total)
    coeff = float(jet.coef[alpha])
    value = coeff * math.prod(math.factorial(a) for a in alpha)
    return EvalValue(value, _status_of(value))


def taylor_jet(f: Expr, center: Sequence[float], degree: int) -> Jet:
    """Full total-degree jet of ``f`` at ``center`` (Taylor coefficients)."""
    if degree > MAX_TOTAL_ORDER:
        raise ValueError(f"degree {degree} exceeds {MAX_TOTAL_ORDER}")
    box = (degree + 1,) * f.arity
    return jet_expand(f, np.asarray(center, dtype=float), box, degree)


def substitute(f: Expr, replacements: Sequence[Expr]) -> Expr:
    """Replace variable ``i`` of ``f`` by ``replacements[i-1]``."""
    if f.kind == VARIABLE:
        return replacements[f.index - 1]
    if f.kind == CONSTANT:
        r0 = replacements[0]
        return const(f.literal, r0.mode, r0.arity)
    kids = tuple(substitute(c, replacements) for c in f.children)
    if f.kind == UNARY:
        return unary(f.func, kids[0])
    if f.kind == POWER:
        return power(*kids)
    return binary(f.func, *kids)


def compose_linear(f: Expr, matrix, shift=None) -> Expr:
    """The expression ``x -> f(matrix @ x + shift)`` in real mode."""
    m = np.asarray(matrix, dtype=float)
    n = m.shape[1]
    shift = np.zeros(m.shape[0]) if shift is None else np.asarray(shift, dtype=float)
    rows = []
    for i in range(m.shape[0]):
        acc = const(float(shift[i]), REAL, n)
        for j in range(n):
            term = binary("*", const(float(m[i, j]), REAL, n), var(j + 1, REAL, n))
            acc = binary("+", acc, term)
        rows.append(acc)
    return substitute(f, rows)
