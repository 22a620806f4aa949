"""Two-variable Taylor tables and ray-wise convergence radii."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .coords import cos_sin
from .expr import MAX_TOTAL_ORDER, REAL, Expr, evaluate, partial_at, ray_coefficients

DEFAULT_DEGREE_BUDGET = 128


class TaylorError(ValueError):
    """A partial derivative needed for the table is not finite."""

    def __init__(self, i: int, j: int, status: str):
        super().__init__(f"partial derivative ({i}, {j}) is {status} at the centre")
        self.index = (i, j)


@dataclass
class TaylorTable:
    degree: int
    center: Tuple[float, float]
    coeffs: np.ndarray  # coeffs[i, j] = a_ij, zero where i + j > degree
    source: Optional[Expr] = None

    def a(self, i: int, j: int) -> float:
        if i + j > self.degree:
            raise IndexError("coefficient beyond the table degree")
        return float(self.coeffs[i, j])

    def as_dict(self) -> Dict[str, float]:
        return {f"{i},{j}": float(self.coeffs[i, j])
                for i in range(self.degree + 1) for j in range(self.degree + 1 - i)}


@dataclass
class PartialSum:
    value: float
    exact: Optional[float]
    gap: float


@dataclass
class RayDiagnostic:
    theta: float
    degrees: List[int]
    roots: List[float]
    limsup: float
    note: str = ""


@dataclass
class ConvergenceProbe:
    thetas: np.ndarray
    radius: np.ndarray
    global_min: float
    r_max: float
    degree_budget: int
    diagnostics: List[RayDiagnostic] = field(default_factory=list)


def taylor_coeffs(f: Expr, center=(0.0, 0.0), degree: int = 4) -> TaylorTable:
    """Coefficients ``a_ij = d^(i+j) f / dx^i dy^j / (i! j!)`` for ``i + j <= degree``."""
    if f.mode != REAL or f.arity != 2:
        raise ValueError("Taylor tables need a real expression in two variables")
    if not 0 <= degree <= MAX_TOTAL_ORDER:
        raise ValueError(f"degree must be in 0..{MAX_TOTAL_ORDER}")
    center = (float(center[0]), float(center[1]))
    table = np.zeros((degree + 1, degree + 1))
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            d = partial_at(f, center, (i, j))
            if not d.ok:
                raise TaylorError(i, j, d.status.value)
            table[i, j] = d.payload / (math.factorial(i) * math.factorial(j))
    return TaylorTable(degree, center, table, f)


def eval_partial_sum(t: TaylorTable, p) -> PartialSum:
    """Partial sum at ``p`` and its gap to the source expression.

    Terms are grouped by total degree and summed by Horner's rule: with
    ``(dx, dy) = rho (cos a, sin a)`` the sum is ``sum_m c_m rho**m`` where
    ``c_m`` collects the degree-``m`` terms.
    """
    dx, dy = float(p[0]) - t.center[0], float(p[1]) - t.center[1]
    rho = math.hypot(dx, dy)
    c, s = (dx / rho, dy / rho) if rho > 0 else (1.0, 0.0)
    grouped = [sum(t.coeffs[i, m - i] * c ** i * s ** (m - i) for i in range(m + 1))
               for m in range(t.degree + 1)]
    value = 0.0
    for cm in reversed(grouped):
        value = value * rho + cm
    value = float(value)
    if t.source is None:
        return PartialSum(value, None, math.nan)
    exact = evaluate(t.source, (float(p[0]), float(p[1])))
    if not exact.ok:
        return PartialSum(value, None, math.inf)
    return PartialSum(value, exact.payload, float(abs(exact.payload - value)))


def _ray_limsup(coefs: np.ndarray) -> Tuple[float, List[int], List[float], str]:
    budget = coefs.size - 1
    m = np.arange(1, budget + 1)
    mag = np.abs(coefs[1:])
    if not np.all(np.isfinite(mag)):
        return math.inf, [], [], "non-finite coefficient"
    top = m >= max(1, (3 * budget) // 4)
    use = top & (mag > 0)
    if not np.any(use):
        return 0.0, [], [], "all-zero tail"
    roots = mag[use] ** (1.0 / m[use])
    degrees = m[use]
    if degrees.size == 1:
        est = float(roots[0])
    else:
        slope, intercept = np.polyfit(1.0 / degrees, roots, 1)
        est = max(float(intercept), 0.0)
    return est, degrees.tolist(), roots.tolist(), ""


def polar_convergence_probe(f: Expr, center=(0.0, 0.0), thetas: Optional[Sequence[float]] = None,
                            r_max: float = 10.0,
                            degree_budget: int = DEFAULT_DEGREE_BUDGET) -> ConvergenceProbe:
    """Radius of convergence of the Taylor series along each ray.

    Along ``theta`` the series groups into ``sum_m c_m(theta) r**m``. The
    root-test values ``|c_m|**(1/m)`` over the top quartile of degrees are fit
    linearly in ``1/m``; the intercept estimates the limsup ``L`` and
    ``r* = 1/L``, reported as infinite when ``L <= 1/r_max``.
    """
    if f.mode != REAL or f.arity != 2:
        raise ValueError("the convergence probe needs a real expression in two variables")
    if degree_budget < 8:
        raise ValueError("degree_budget must be at least 8")
    if thetas is None:
        thetas = 2.0 * math.pi * np.arange(64) / 64
    thetas = np.asarray(thetas, dtype=float)
    c, s = cos_sin(thetas)
    base = np.broadcast_to(np.asarray(center, dtype=float)[:, None], (2, thetas.size))
    coefs = ray_coefficients(f, base, np.stack([c, s]), degree_budget)
    radius = np.empty(thetas.size)
    diags = []
    for k, theta in enumerate(thetas):
        est, degrees, roots, note = _ray_limsup(coefs[:, k])
        radius[k] = math.inf if est <= 1.0 / r_max else 1.0 / est
        diags.append(RayDiagnostic(float(theta), degrees, roots, est, note))
    finite = radius[np.isfinite(radius)]
    gmin = float(finite.min()) if finite.size else math.inf
    return ConvergenceProbe(thetas, radius, gmin, float(r_max), int(degree_budget), diags)
