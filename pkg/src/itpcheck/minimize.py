"""Grid minimization with local polishing.

Margins are minimized on a deterministic grid first; the lowest local minima
of the grid are then polished with a bounded scalar search (angles) or
Nelder-Mead (sphere). Results are the best value seen, never certified
global minima.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.optimize import minimize, minimize_scalar

MAX_POLISH = 6


def grid_local_minima(values: np.ndarray, periodic: bool = True, limit: int = MAX_POLISH) -> list[int]:
    """Indices of the lowest discrete local minima of a 1D sample."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return [int(np.argmin(v))]
    left = np.roll(v, 1)
    right = np.roll(v, -1)
    mask = (v <= left) & (v <= right)
    if not periodic:
        mask[0] = v[0] <= v[1]
        mask[-1] = v[-1] <= v[-2]
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        idx = np.array([int(np.argmin(v))])
    idx = idx[np.argsort(v[idx], kind="stable")]
    return [int(i) for i in idx[:limit]]


def polish_angle(fun: Callable[[float], float], angles: np.ndarray, values: np.ndarray,
                 periodic: bool = True) -> tuple[float, float]:
    """Refine the minimum of ``fun`` over a uniform angle grid.

    Returns (value, angle) with value <= min(values).
    """
    angles = np.asarray(angles, dtype=float)
    values = np.asarray(values, dtype=float)
    j0 = int(np.argmin(values))
    best_val, best_ang = float(values[j0]), float(angles[j0])
    if best_val == 0.0 or angles.size < 2:
        return best_val, best_ang
    step = float(angles[1] - angles[0])
    for j in grid_local_minima(values, periodic):
        res = minimize_scalar(fun, bounds=(angles[j] - step, angles[j] + step), method="bounded",
                              options={"xatol": 1e-13, "maxiter": 200})
        if res.fun < best_val:
            best_val, best_ang = float(res.fun), float(res.x)
    return best_val, best_ang


def sphere_point(theta: float, phi: float) -> np.ndarray:
    st = math.sin(theta)
    return np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])


def polish_sphere(fun: Callable[[np.ndarray], float], start: np.ndarray) -> tuple[float, np.ndarray]:
    """Nelder-Mead on spherical angles started from a unit 3-vector.

    The chart is rotated so that ``start`` sits on the equator, away from the
    coordinate poles.
    """
    start = np.asarray(start, dtype=float)
    start = start / np.linalg.norm(start)
    # orthonormal basis (e1, e2, e3) with start = e1
    helper = np.eye(3)[int(np.argmin(np.abs(start)))]
    e2 = np.cross(start, helper)
    e2 /= np.linalg.norm(e2)
    e3 = np.cross(start, e2)
    basis = np.column_stack([start, e2, e3])

    def to_vec(p):
        # theta measured from e3, phi from e1 in the (e1, e2) plane
        return basis @ sphere_point(math.pi / 2 + p[0], p[1])

    f0 = float(fun(start))
    res = minimize(lambda p: fun(to_vec(p)), np.zeros(2), method="Nelder-Mead",
                   options={"xatol": 1e-11, "fatol": 1e-15, "maxiter": 2000,
                            "initial_simplex": np.array([[0, 0], [0.02, 0], [0, 0.02]])})
    if res.fun < f0:
        return float(res.fun), to_vec(res.x)
    return f0, start


def segment_distance(p0, p1):
    """Distance from 0 to the segment w*p1 + (1-w)*p0, w in [0,1], and the minimizing w.

    Works elementwise on arrays of complex endpoints.
    """
    p0 = np.asarray(p0, dtype=complex)
    p1 = np.asarray(p1, dtype=complex)
    d = p1 - p0
    dd = np.abs(d) ** 2
    safe = np.where(dd > 0, dd, 1.0)
    w = np.where(dd > 0, np.clip(-np.real(np.conj(d) * p0) / safe, 0.0, 1.0), 0.0)
    return np.abs(p0 + w * d), w
