"""Argument-principle zero counting on rectangles.

The phase of f is accumulated along the counterclockwise boundary. Each
side starts with ``resolution`` segments; any segment whose phase step is
pi/2 or more is bisected until every step is below pi/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

CONTOUR_ZERO = 1e-12
MAX_POINTS_PER_SIDE = 2**16


class ContourZeroError(RuntimeError):
    pass


class ContourConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ZeroCount:
    rectangle: tuple
    count: int
    winding: float
    refined_zeros: list = field(default_factory=list)
    n_points: int = 0

    @property
    def winding_residual(self) -> float:
        return abs(self.winding - round(self.winding))


def _corners(rect):
    x0, x1, y0, y1 = rect
    return np.array([complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)])


def _points(rect, s: np.ndarray) -> np.ndarray:
    c = _corners(rect)
    side = np.minimum(np.floor(s).astype(int), 3)
    frac = s - side
    return c[side] + frac * (c[(side + 1) % 4] - c[side])


def winding_number(f, rect, resolution: int = 256) -> tuple[float, int]:
    """Raw winding number of f along the rectangle and the number of samples used."""
    x0, x1, y0, y1 = rect
    if not (x1 > x0 and y1 > y0):
        raise ValueError("rectangle must satisfy x0 < x1 and y0 < y1")
    s = np.concatenate([side + np.arange(resolution) / resolution for side in range(4)])
    fz = np.asarray(f(_points(rect, s)), dtype=complex)
    while True:
        if np.any(~np.isfinite(fz)):
            raise ContourConvergenceError("non-finite function value on the contour")
        if np.any(np.abs(fz) <= CONTOUR_ZERO):
            j = int(np.argmin(np.abs(fz)))
            raise ContourZeroError(
                f"zero on contour near k={complex(_points(rect, s[j:j + 1])[0]):.6g} - perturb rectangle")
        ratio = np.roll(fz, -1) / fz
        steps = np.angle(ratio)
        bad = np.flatnonzero(np.abs(steps) >= math.pi / 2)
        if bad.size == 0:
            return float(np.sum(steps) / (2 * math.pi)), int(s.size)
        if s.size + bad.size > 4 * MAX_POINTS_PER_SIDE:
            raise ContourConvergenceError("phase bisection did not converge")
        s_next = np.where(bad + 1 < s.size, s[(bad + 1) % s.size], 4.0)
        mids = 0.5 * (s[bad] + s_next)
        fm = np.asarray(f(_points(rect, mids)), dtype=complex)
        order = np.argsort(np.concatenate([s, mids]), kind="stable")
        s = np.concatenate([s, mids])[order]
        fz = np.concatenate([fz, fm])[order]


def _newton(f, z0: complex, max_iter: int = 60):
    z = complex(z0)
    for _ in range(max_iter):
        h = 1e-7 * max(1.0, abs(z))
        fz, fp, fm = np.asarray(f(np.array([z, z + h, z - h])), dtype=complex)
        d = (fp - fm) / (2 * h)
        if d == 0:
            return z, False
        step = fz / d
        z -= step
        if abs(step) <= 1e-13 * max(1.0, abs(z)):
            return z, True
    return z, False


def _inside(rect, z, pad=0.0) -> bool:
    x0, x1, y0, y1 = rect
    return x0 - pad <= z.real <= x1 + pad and y0 - pad <= z.imag <= y1 + pad


def _split(rect, frac):
    x0, x1, y0, y1 = rect
    if (x1 - x0) >= (y1 - y0):
        xm = x0 + frac * (x1 - x0)
        return (x0, xm, y0, y1), (xm, x1, y0, y1)
    ym = y0 + frac * (y1 - y0)
    return (x0, x1, y0, ym), (x0, x1, ym, y1)


def _locate(f, rect, count: int, depth: int = 0) -> list[complex]:
    if count == 0:
        return []
    x0, x1, y0, y1 = rect
    center = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
    if count == 1:
        z, ok = _newton(f, center)
        if ok and _inside(rect, z):
            return [z]
    if max(x1 - x0, y1 - y0) < 1e-8 or depth > 60:
        z, ok = _newton(f, center)
        return [z if ok and _inside(rect, z, 1e-8) else center] * count
    for frac in (0.5, 0.5 + 1 / (2 * math.pi), 0.5 - 1 / (3 * math.e)):
        halves = _split(rect, frac)
        try:
            counts = [int(round(winding_number(f, h, 32)[0])) for h in halves]
        except ContourZeroError:
            continue
        if sum(counts) == count:
            return [z for h, c in zip(halves, counts) for z in _locate(f, h, c, depth + 1)]
    raise ContourConvergenceError(f"could not split rectangle {rect} consistently")


def count_zeros(f, rect, resolution: int = 256, refine: bool = False) -> ZeroCount:
    """Number of zeros (with multiplicity) of the analytic map f inside rect."""
    rect = tuple(float(v) for v in rect)
    w, npts = winding_number(f, rect, resolution)
    if abs(w - round(w)) >= 0.25:
        raise ContourConvergenceError(f"winding number {w} is not near an integer")
    count = int(round(w))
    if count < 0:
        raise ContourConvergenceError("negative winding: f has poles inside the rectangle")
    zeros = []
    if refine and count > 0:
        zeros = sorted(_locate(f, rect, count), key=lambda z: (z.real, z.imag))
        if len(zeros) != count:
            raise ContourConvergenceError("refinement found a different number of zeros")
    return ZeroCount(rect, count, w, zeros, npts)
