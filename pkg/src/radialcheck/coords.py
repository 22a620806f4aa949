"""Hyperspherical <-> Cartesian coordinates and direction grids.

Convention for N dimensions with angles ``phi_1 .. phi_{N-1}``::

    u_1     = cos(phi_1)
    u_2     = sin(phi_1) cos(phi_2)
    ...
    u_{N-1} = sin(phi_1) ... sin(phi_{N-2}) cos(phi_{N-1})
    u_N     = sin(phi_1) ... sin(phi_{N-1})

The first N-2 angles lie in [0, pi] and the last in [0, 2 pi). For N = 2
this is the familiar (r cos t, r sin t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

HyperAngles = Tuple[float, ...]

MAX_GRID_NODES = 4096
TWO_PI = 2.0 * math.pi
_HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class RadialPoint:
    r: float
    angles: HyperAngles
    center: Tuple[float, ...]

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("radius must be nonnegative")
        if len(self.angles) != len(self.center) - 1:
            raise ValueError("need N-1 angles for an N-dimensional center")


def cos_sin(phi) -> Tuple[np.ndarray, np.ndarray]:
    """Cosine and sine, exact at multiples of pi/2.

    Snapping keeps axis directions on the axes (cos(pi/2) is exactly 0), so a
    ray along an axis never leaves a coordinate hyperplane through rounding.
    """
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(phi), np.sin(phi)
    k = np.rint(phi / _HALF_PI)
    snap = np.abs(phi - k * _HALF_PI) <= 8 * np.finfo(float).eps * np.maximum(1.0, np.abs(phi))
    if np.any(snap):
        q = np.mod(k, 4).astype(int)
        c = np.where(snap, np.choose(q, [1.0, 0.0, -1.0, 0.0]), c)
        s = np.where(snap, np.choose(q, [0.0, 1.0, 0.0, -1.0]), s)
    return c, s


def unit_vectors(angles) -> np.ndarray:
    """Unit direction vectors for an array of angle tuples, shape (M, N-1) -> (M, N)."""
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    m, k = angles.shape
    c, s = cos_sin(angles)
    u = np.empty((m, k + 1))
    running = np.ones(m)
    for i in range(k):
        u[:, i] = running * c[:, i]
        running = running * s[:, i]
    u[:, k] = running
    return u


def to_cartesian(rp: RadialPoint) -> np.ndarray:
    u = unit_vectors([rp.angles])[0]
    return np.asarray(rp.center, dtype=float) + rp.r * u


def from_cartesian(p: Sequence[float], center: Sequence[float]) -> RadialPoint:
    """Inverse of :func:`to_cartesian`. At ``p == center`` all angles are 0."""
    v = np.asarray(p, dtype=float) - np.asarray(center, dtype=float)
    n = v.size
    if n < 2:
        raise ValueError("need at least two dimensions")
    r = float(np.linalg.norm(v))
    angles = [0.0] * (n - 1)
    if r > 0:
        for i in range(n - 2):
            tail = float(np.linalg.norm(v[i + 1:]))
            if tail == 0.0:
                angles[i] = 0.0 if v[i] >= 0 else math.pi
                break
            angles[i] = math.atan2(tail, v[i])
        else:
            az = math.atan2(v[n - 1], v[n - 2]) % TWO_PI
            # a tiny negative angle rounds up to 2*pi
            angles[n - 2] = 0.0 if az >= TWO_PI else az
    return RadialPoint(r, tuple(angles), tuple(float(c) for c in center))


def _node_count(n_dim: int, res: int) -> int:
    if n_dim == 2:
        return res
    interior = res // 2 - 1  # polar angles strictly inside (0, pi)
    count = res
    for _ in range(n_dim - 2):
        count = interior * count + 2
    return count


def angle_grid(n_dim: int, resolution: int) -> List[HyperAngles]:
    """Deterministic direction grid over the unit (N-1)-sphere.

    For N = 2 this is ``resolution`` equally spaced angles. For N >= 3 the
    resolution is rounded up to a multiple of 4 (so the axis directions are
    included) and reduced in steps of 4 until the grid has at most
    4096 distinct nodes. Angles after a polar angle of 0 or pi do not change
    the direction and are set to 0.
    """
    if n_dim < 2:
        raise ValueError("dimension must be at least 2")
    if resolution < 4:
        raise ValueError("resolution must be at least 4")
    if n_dim == 2:
        return [(TWO_PI * k / resolution,) for k in range(resolution)]
    res = -(-resolution // 4) * 4
    while res > 4 and _node_count(n_dim, res) > MAX_GRID_NODES:
        res -= 4
    polar = [math.pi * k / (res // 2) for k in range(res // 2 + 1)]
    azimuth = [TWO_PI * k / res for k in range(res)]
    nodes: List[HyperAngles] = []

    def build(prefix):
        depth = len(prefix)
        if depth == n_dim - 2:
            for a in azimuth:
                nodes.append(tuple(prefix) + (a,))
            return
        for p in polar:
            if p in (0.0, math.pi):
                nodes.append(tuple(prefix) + (p,) + (0.0,) * (n_dim - 2 - depth))
            else:
                build(prefix + [p])

    build([])
    return nodes


def grid_spacing(n_dim: int, grid: Sequence[HyperAngles]) -> np.ndarray:
    """Per-angle spacing of a grid produced by :func:`angle_grid`."""
    if n_dim == 2:
        return np.array([TWO_PI / len(grid)])
    last = sorted({g[-1] for g in grid})
    step_az = last[1] - last[0] if len(last) > 1 else TWO_PI
    step_polar = step_az  # polar axis uses res/2 intervals over pi
    return np.array([step_polar] * (n_dim - 2) + [step_az])


def grid_directions(n_dim: int, resolution: int) -> Tuple[List[HyperAngles], np.ndarray]:
    grid = angle_grid(n_dim, resolution)
    return grid, unit_vectors(grid)
