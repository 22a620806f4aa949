"""Quaternion arithmetic.

Arrays of quaternions are numpy arrays whose last axis holds the components
``(a, b, c, d)`` of ``a + b i + c j + d k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def qmul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product, broadcasting over leading axes."""
    p, q = np.broadcast_arrays(np.asarray(p, dtype=float), np.asarray(q, dtype=float))
    a1, b1, c1, d1 = np.moveaxis(p, -1, 0)
    a2, b2, c2, d2 = np.moveaxis(q, -1, 0)
    return np.stack([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ], axis=-1)


def qconj(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm2(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.sum(q * q, axis=-1)


def qnorm(q: np.ndarray) -> np.ndarray:
    return np.sqrt(qnorm2(q))


def qinv(q: np.ndarray) -> np.ndarray:
    """Inverse; the zero quaternion maps to inf (nan where 0/0)."""
    n2 = qnorm2(q)[..., None]
    c = qconj(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        return c / n2


def qdiv(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Right division ``p * q^-1``.

    Division by the zero quaternion gives an infinite result for a nonzero
    numerator and nan for ``0/0``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    out = qmul(p, qinv(q))
    zero = qnorm2(q) == 0.0
    if np.any(zero):
        num_zero = qnorm2(np.broadcast_to(p, out.shape)) == 0.0
        out = np.where(zero[..., None],
                       np.where(num_zero[..., None], np.nan, np.array([np.inf, 0, 0, 0])),
                       out)
    return out


def _split(q):
    q = np.asarray(q, dtype=float)
    a = q[..., 0]
    v = q[..., 1:]
    vn = np.sqrt(np.sum(v * v, axis=-1))
    with np.errstate(divide="ignore", invalid="ignore"):
        unit = np.where(vn[..., None] > 0, v / np.where(vn > 0, vn, 1.0)[..., None], 0.0)
    return a, v, vn, unit


def qexp(q):
    a, _, vn, unit = _split(q)
    ea = np.exp(a)
    return np.concatenate([(ea * np.cos(vn))[..., None],
                           (ea * np.sin(vn))[..., None] * unit], axis=-1)


def qlog(q):
    """Principal logarithm; log(0) is nan."""
    a, _, vn, unit = _split(q)
    n = qnorm(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        ln = np.where(n > 0, np.log(np.where(n > 0, n, 1.0)), np.nan)
    ang = np.arctan2(vn, a)
    # negative reals: pick the i axis for the imaginary direction
    unit = np.where(((vn == 0) & (a < 0))[..., None], np.array([1.0, 0.0, 0.0]), unit)
    return np.concatenate([ln[..., None], ang[..., None] * unit], axis=-1)


def qsin(q):
    a, _, vn, unit = _split(q)
    return np.concatenate([(np.sin(a) * np.cosh(vn))[..., None],
                           (np.cos(a) * np.sinh(vn))[..., None] * unit], axis=-1)


def qcos(q):
    a, _, vn, unit = _split(q)
    return np.concatenate([(np.cos(a) * np.cosh(vn))[..., None],
                           (-np.sin(a) * np.sinh(vn))[..., None] * unit], axis=-1)


def qpow_int(q: np.ndarray, n: int) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if n < 0:
        return qpow_int(qinv_checked(q), -n)
    result = np.broadcast_to(np.array([1.0, 0.0, 0.0, 0.0]), q.shape).copy()
    base = q
    while n:
        if n & 1:
            result = qmul(result, base)
        n >>= 1
        if n:
            base = qmul(base, base)
    return result


def qinv_checked(q):
    return qdiv(np.array([1.0, 0.0, 0.0, 0.0]), q)


def as_qarray(value) -> np.ndarray:
    if isinstance(value, Quaternion):
        return value.array
    if isinstance(value, complex):
        return np.array([value.real, value.imag, 0.0, 0.0])
    if isinstance(value, tuple) and len(value) == 4:
        return np.array(value, dtype=float)
    arr = np.asarray(value, dtype=float)
    if arr.shape and arr.shape[-1] == 4:
        return arr
    return np.stack([arr, np.zeros_like(arr), np.zeros_like(arr), np.zeros_like(arr)], axis=-1)


@dataclass(frozen=True)
class Quaternion:
    """A single quaternion ``a + b i + c j + d k``."""

    a: float
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        a, b, c, d = (float(x) for x in np.asarray(arr, dtype=float))
        return cls(a, b, c, d)

    @property
    def array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)

    def __add__(self, other):
        return Quaternion.from_array(self.array + as_qarray(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Quaternion.from_array(self.array - as_qarray(other))

    def __rsub__(self, other):
        return Quaternion.from_array(as_qarray(other) - self.array)

    def __mul__(self, other):
        return Quaternion.from_array(qmul(self.array, as_qarray(other)))

    def __rmul__(self, other):
        return Quaternion.from_array(qmul(as_qarray(other), self.array))

    def __truediv__(self, other):
        return Quaternion.from_array(qdiv(self.array, as_qarray(other)))

    def __neg__(self):
        return Quaternion.from_array(-self.array)

    def __abs__(self):
        return float(qnorm(self.array))

    def conjugate(self):
        return Quaternion.from_array(qconj(self.array))

    def inverse(self):
        return Quaternion.from_array(qinv_checked(self.array))

    def __str__(self):
        return f"{self.a!r}{self.b:+}i{self.c:+}j{self.d:+}k"
