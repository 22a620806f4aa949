"""Complex and quaternion differentiability by radial difference quotients.

For a complex ``f`` the polar quotient ``e^{-i theta} (f(z0 + r e^{i theta}) - f(z0)) / r``
is extrapolated to r -> 0 along every grid direction. ``f`` is complex
differentiable at ``z0`` when the radial derivatives of its real and
imaginary parts exist and the quotient limit does not depend on ``theta``.
Quaternion increments ``r u`` are handled the same way, with the unit
quaternion ``u`` divided out on a declared side so the remaining division is
by the real scalar ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import _ladder
from .coords import HyperAngles, angle_grid, cos_sin, grid_directions
from .expr import COMPLEX, QUATERNION, Expr, Quaternion, evaluate, evaluate_many
from .expr.quaternion import as_qarray, qconj, qmul
from .radial import AngleValue, RadialConfig
from .report import Verdict

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass
class ComplexDiffReport:
    verdict: Verdict
    z0: complex
    per_angle: List[AngleValue]
    spread: float
    derivative: Optional[complex]
    pr_exists: bool
    qr_exists: bool
    uniformity: np.ndarray
    reason: str = ""


@dataclass
class QuatDiffReport:
    verdict: Verdict
    h0: Quaternion
    side: str
    per_direction: List[AngleValue]
    spread: float
    derivative: Optional[Quaternion]
    uniformity: np.ndarray
    reason: str = ""


@dataclass(frozen=True)
class HigherDerivConfig:
    """Ladder ``|t| = r0 * shrink**k`` (k < rungs) and ``n_angles`` values of arg(t)."""

    r0: float = 0.05
    shrink: float = 0.5
    rungs: int = 6
    n_angles: int = 8

    def __post_init__(self):
        if self.r0 <= 0 or not 0.0 < self.shrink < 1.0:
            raise ValueError("need r0 > 0 and 0 < shrink < 1")
        if self.rungs < 4 or self.n_angles < 4:
            raise ValueError("need at least 4 rungs and 4 angles")

    def offsets(self) -> np.ndarray:
        r = self.r0 * self.shrink ** np.arange(self.rungs)
        theta = 2.0 * math.pi * np.arange(self.n_angles) / self.n_angles
        c, s = cos_sin(theta)
        return r[None, :] * (c + 1j * s)[:, None]


@dataclass
class HigherDerivative:
    verdict: Verdict
    z0: complex
    order: int
    value: Optional[complex]
    rung_estimates: np.ndarray
    differences: np.ndarray
    reason: str = ""


@dataclass
class ContinuitySample:
    z: complex
    verdict: Verdict
    derivative: Optional[complex]


@dataclass
class ContinuityReport:
    center: complex
    radius: float
    samples: List[ContinuitySample]
    all_differentiable: bool
    n_differentiable: int
    max_jump: float
    max_jump_ratio: float


def _max_pairwise(values: np.ndarray, chunk: int = 512) -> float:
    """Largest distance between rows (or complex entries) of ``values``."""
    v = values.reshape(values.shape[0], -1)
    if v.dtype.kind == "c":
        v = np.concatenate([v.real, v.imag], axis=1)
    best = 0.0
    for start in range(0, v.shape[0], chunk):
        d = np.linalg.norm(v[start:start + chunk, None, :] - v[None, :, :], axis=-1)
        best = max(best, float(d.max()))
    return best


def _uniformity(quot: np.ndarray, target, mask: np.ndarray) -> np.ndarray:
    """Sup over directions of ``|quot - target|`` per rung; inf where undefined."""
    diff = quot - target
    if diff.ndim == 3:
        dev = np.linalg.norm(diff, axis=-1)
    else:
        dev = np.abs(diff)
    dev = np.where(mask, dev, np.inf)
    return dev.max(axis=0)


def _verdict_from_quotients(quot, mask, radii, cfg):
    """Extrapolated quotient limits, settled flags and the rung window."""
    idx = _ladder.window_indices(radii, 1)
    window = np.moveaxis(quot[:, idx], 1, -1)
    est, err = _ladder.richardson(window, cfg.shrink)
    if est.ndim == 2:  # quaternion components
        good = np.all(_ladder.settled(est, err, cfg.tol_exist), axis=-1)
    else:
        good = _ladder.settled(est, err, cfg.tol_exist)
    good &= np.all(mask[:, idx], axis=1)
    return est, good


def cr_check(f: Expr, z0: complex, cfg: RadialConfig = RadialConfig()) -> ComplexDiffReport:
    """Complex differentiability at ``z0`` via the polar difference quotient."""
    if f.mode != COMPLEX:
        raise ValueError("cr_check needs a complex-mode expression")
    z0 = complex(z0)
    grid, dirs = grid_directions(2, cfg.angle_resolution)
    radii = cfg.radii()
    f0 = evaluate(f, z0)
    empty = [AngleValue(a, None) for a in grid]
    if not f0.ok:
        return ComplexDiffReport(Verdict.UNDEFINED, z0, empty, math.nan, None, False, False,
                                 np.full(radii.size, math.nan),
                                 f"f is {f0.status.value} at z0")
    e = dirs[:, 0] + 1j * dirs[:, 1]
    pts = z0 + radii[None, :] * e[:, None]
    vals, codes = evaluate_many(f, pts)
    mask = codes == 0
    with np.errstate(all="ignore"):
        delta = (vals - f0.payload) / radii[None, :]
    # radial derivatives of the real and imaginary parts
    _, pr_good = _verdict_from_quotients(delta.real, mask, radii, cfg)
    _, qr_good = _verdict_from_quotients(delta.imag, mask, radii, cfg)
    quot = np.conj(e)[:, None] * delta
    est, good = _verdict_from_quotients(quot, mask, radii, cfg)
    good &= pr_good & qr_good
    per_angle = [AngleValue(a, complex(q) if g else None) for a, q, g in zip(grid, est, good)]
    pr_ok, qr_ok = bool(np.all(pr_good)), bool(np.all(qr_good))
    finite = est[good]
    spread = _max_pairwise(finite) if finite.size else math.nan
    mean = complex(finite.mean()) if finite.size else complex(math.nan, math.nan)
    uniformity = _uniformity(quot, mean, mask)
    common = dict(z0=z0, per_angle=per_angle, spread=spread, pr_exists=pr_ok, qr_exists=qr_ok,
                  uniformity=uniformity)
    if not (pr_ok and qr_ok and np.all(good)):
        return ComplexDiffReport(Verdict.NOT_DIFFERENTIABLE, derivative=None,
                                 reason="radial derivative of Re f or Im f does not exist "
                                        "in every direction", **common)
    if not spread < cfg.tol_value:
        return ComplexDiffReport(Verdict.NOT_DIFFERENTIABLE, derivative=None,
                                 reason=f"quotient limits depend on the angle (spread {spread:.3g})",
                                 **common)
    slack = cfg.tol_value * (1.0 + abs(mean))
    if not _ladder.eventually_decreasing(uniformity, cfg.tol_exist, slack):
        return ComplexDiffReport(Verdict.NOT_DIFFERENTIABLE, derivative=None,
                                 reason="quotients do not converge uniformly", **common)
    return ComplexDiffReport(Verdict.DIFFERENTIABLE, derivative=mean, **common)


def sample_disc(center: complex, radius: float, samples: int) -> np.ndarray:
    """Deterministic Vogel-spiral sample of a disc; the first point is the centre."""
    k = np.arange(samples)
    rho = radius * np.sqrt(k / max(samples - 1, 1))
    c, s = cos_sin(k * GOLDEN_ANGLE)
    return complex(center) + rho * (c + 1j * s)


def derivative_continuity_probe(f: Expr, center: complex, radius: float, samples: int = 16,
                                cfg: RadialConfig = RadialConfig()) -> ContinuityReport:
    """Run :func:`cr_check` over a disc and estimate how much ``f'`` jumps
    between nearest-neighbour samples.
    """
    if samples < 8:
        raise ValueError("need at least 8 samples")
    if radius <= 0:
        raise ValueError("radius must be positive")
    zs = sample_disc(center, radius, samples)
    out = []
    for z in zs:
        rep = cr_check(f, z, cfg)
        out.append(ContinuitySample(complex(z), rep.verdict, rep.derivative))
    ok = [i for i, s in enumerate(out) if s.derivative is not None]
    jump, ratio = 0.0, 0.0
    if len(ok) >= 2:
        pts = zs[ok]
        ders = np.array([out[i].derivative for i in ok])
        dist = np.abs(pts[:, None] - pts[None, :])
        np.fill_diagonal(dist, np.inf)
        nearest = np.argmin(dist, axis=1)
        jumps = np.abs(ders - ders[nearest])
        jump = float(jumps.max())
        ratio = float(np.max(jumps / dist[np.arange(len(ok)), nearest]))
    return ContinuityReport(complex(center), float(radius), out, len(ok) == samples, len(ok),
                            jump, ratio)


def _derivative_values(f: Expr, zs: np.ndarray, k: int, offsets: np.ndarray, shrink: float
                       ) -> Tuple[np.ndarray, np.ndarray]:
    """``f^(k)`` at each of ``zs`` by iterated first-principles quotients.

    Returns the extrapolated values and the angle-averaged quotients per
    rung for the outermost level.
    """
    if k == 0:
        vals, _ = evaluate_many(f, zs)
        return vals, np.empty(zs.shape + (0,))
    shifted = zs[..., None, None] + offsets
    upper, _ = _derivative_values(f, shifted, k - 1, offsets, shrink)
    here, _ = _derivative_values(f, zs, k - 1, offsets, shrink)
    with np.errstate(all="ignore"):
        quot = (upper - here[..., None, None]) / offsets
    rung = quot.mean(axis=-2)
    est, _ = _ladder.richardson(rung, shrink)
    return est, rung


def higher_derivative(f: Expr, z0: complex, order: int,
                      cfg: HigherDerivConfig = HigherDerivConfig(),
                      radial_cfg: RadialConfig = RadialConfig()) -> HigherDerivative:
    """``f^(order)(z0)`` by iterated difference quotients.

    Each level takes ``[f^(k-1)(z0 + t) - f^(k-1)(z0)] / t`` averaged over
    ``arg t`` on the ladder and extrapolates to ``|t| -> 0``; lower levels are
    produced by the same procedure. The verdict is ``NOT_ANALYTIC`` when
    ``f`` fails :func:`cr_check` near ``z0`` or the rung estimates do not
    form a Cauchy-like sequence.
    """
    if f.mode != COMPLEX:
        raise ValueError("higher_derivative needs a complex-mode expression")
    if order < 1:
        raise ValueError("order must be at least 1")
    z0 = complex(z0)
    offsets = cfg.offsets()
    empty = np.array([], dtype=complex)
    ring = z0 + cfg.r0 * np.exp(0.5j * math.pi * np.arange(4))
    for z in [z0, *ring]:
        rep = cr_check(f, z, radial_cfg)
        if rep.verdict is not Verdict.DIFFERENTIABLE:
            return HigherDerivative(Verdict.NOT_ANALYTIC, z0, order, None, empty, np.array([]),
                                    f"not complex differentiable at {z}: {rep.reason}")
    est, rung = _derivative_values(f, np.array([z0]), order, offsets, cfg.shrink)
    value, rung = complex(est[0]), rung[0]
    diffs = np.abs(np.diff(rung))
    floor = 1e-7 * (1.0 + abs(value))
    cauchy = all(b <= a or b <= floor for a, b in zip(diffs[:-1], diffs[1:])) and diffs[-1] <= \
        max(floor, 1e-3 * (1.0 + abs(value)))
    if not (np.isfinite(value) and cauchy):
        return HigherDerivative(Verdict.NOT_ANALYTIC, z0, order, None, rung, diffs,
                                "rung estimates do not settle")
    return HigherDerivative(Verdict.ANALYTIC, z0, order, value, rung, diffs)


def quat_diff_check(f: Expr, h0, side: str = "left",
                    cfg: RadialConfig = RadialConfig()) -> QuatDiffReport:
    """Quaternion differentiability with ``dh = r u`` for unit quaternions ``u``.

    ``side="left"`` uses ``u^-1 (f(h0 + r u) - f(h0)) / r`` and
    ``side="right"`` uses ``(f(h0 + r u) - f(h0)) u^-1 / r``.
    """
    if f.mode != QUATERNION:
        raise ValueError("quat_diff_check needs a quaternion-mode expression")
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    h0a = as_qarray(h0 if not isinstance(h0, Quaternion) else h0.array).reshape(4)
    h0q = Quaternion.from_array(h0a)
    grid, dirs = grid_directions(4, cfg.angle_resolution)
    radii = cfg.radii()
    f0 = evaluate(f, h0a)
    empty = [AngleValue(a, None) for a in grid]
    if not f0.ok:
        return QuatDiffReport(Verdict.UNDEFINED, h0q, side, empty, math.nan, None,
                              np.full(radii.size, math.nan), f"f is {f0.status.value} at h0")
    pts = h0a + radii[None, :, None] * dirs[:, None, :]
    vals, codes = evaluate_many(f, pts)
    mask = codes == 0
    with np.errstate(all="ignore"):
        delta = (vals - f0.payload.array) / radii[None, :, None]
    inv = qconj(dirs)[:, None, :]
    quot = qmul(inv, delta) if side == "left" else qmul(delta, inv)
    est, good = _verdict_from_quotients(quot, mask, radii, cfg)
    per = [AngleValue(a, tuple(float(x) for x in q) if g else None)
           for a, q, g in zip(grid, est, good)]
    finite = est[good]
    spread = _max_pairwise(finite) if finite.size else math.nan
    mean = finite.mean(axis=0) if finite.size else np.full(4, math.nan)
    uniformity = _uniformity(quot, mean, mask)
    common = dict(h0=h0q, side=side, per_direction=per, spread=spread, uniformity=uniformity)
    if not np.all(good):
        return QuatDiffReport(Verdict.NOT_DIFFERENTIABLE, derivative=None,
                              reason="quotient has no limit in some direction", **common)
    if not spread < cfg.tol_value:
        return QuatDiffReport(Verdict.NOT_DIFFERENTIABLE, derivative=None,
                              reason=f"quotient limits depend on the direction (spread {spread:.3g})",
                              **common)
    slack = cfg.tol_value * (1.0 + float(np.linalg.norm(mean)))
    if not _ladder.eventually_decreasing(uniformity, cfg.tol_exist, slack):
        return QuatDiffReport(Verdict.NOT_DIFFERENTIABLE, derivative=None,
                              reason="quotients do not converge uniformly", **common)
    return QuatDiffReport(Verdict.DIFFERENTIABLE, derivative=Quaternion.from_array(mean), **common)
