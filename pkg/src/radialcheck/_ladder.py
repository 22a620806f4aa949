"""Radius ladders and Richardson extrapolation shared by the radial checks."""

from __future__ import annotations

from typing import Tuple

import numpy as np

WINDOW = 6
LEVELS = 2

# Smallest radius used when extrapolating a quotient that divides by r**m.
# Below these radii rounding in f(c + r u) - f(c) dominates the quotient.
ROUNDOFF_FLOOR = {0: 0.0, 1: 1e-4, 2: 1e-3}


def geometric_ladder(r0: float, shrink: float, depth: int) -> np.ndarray:
    return r0 * shrink ** np.arange(depth)


def window_indices(radii: np.ndarray, order: int, size: int = WINDOW) -> np.ndarray:
    """Indices of the last ``size`` rungs at or above the roundoff floor."""
    floor = ROUNDOFF_FLOOR.get(order, ROUNDOFF_FLOOR[2])
    usable = np.flatnonzero(radii >= floor)
    if usable.size < size:
        usable = np.arange(min(size, radii.size))
    return usable[-size:]


def richardson(values: np.ndarray, ratio: float, power_step: int = 1,
               levels: int = LEVELS) -> Tuple[np.ndarray, np.ndarray]:
    """Extrapolate sequences sampled on a geometric ladder to r -> 0.

    ``values[..., k]`` is the sequence at rung ``k`` (radius ``r0 * ratio**k``).
    Level ``j`` removes the ``r**(j * power_step)`` term. Returns the
    extrapolated value and the difference of the last two entries of the
    final level, used as the error estimate.
    """
    t = np.asarray(values)
    with np.errstate(all="ignore"):
        for j in range(1, levels + 1):
            q = ratio ** (j * power_step)
            t = (t[..., 1:] - q * t[..., :-1]) / (1.0 - q)
        est = t[..., -1]
        err = np.abs(t[..., -1] - t[..., -2]) if t.shape[-1] > 1 else np.zeros(np.shape(est))
    return est, err


def settled(est: np.ndarray, err: np.ndarray, tol: float) -> np.ndarray:
    """Whether an extrapolated sequence has converged (abs+rel tolerance)."""
    with np.errstate(invalid="ignore"):
        scale = 1.0 + np.abs(est)
        return np.isfinite(est) & np.isfinite(err) & (err <= tol * scale)


def eventually_decreasing(seq: np.ndarray, final_tol: float, slack: float) -> bool:
    """True when the second half of ``seq`` never rises by more than
    ``slack`` and its last entry is at most ``final_tol``.
    """
    seq = np.asarray(seq, dtype=float)
    if seq.size == 0 or not np.all(np.isfinite(seq)):
        return False
    tail = seq[seq.size // 2:]
    rises = np.diff(tail)
    return bool(tail[-1] <= final_tol and (rises.size == 0 or np.max(rises) <= slack))
