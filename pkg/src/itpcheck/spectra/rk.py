"""Dormand-Prince 5(4) integrator for batches of complex linear ODEs.

All members of the batch share one step size, controlled by the worst
scaled local error in the batch, so a whole contour of k values is
integrated with vectorized arithmetic.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


class StepSizeUnderflow(RuntimeError):
    pass


def integrate(rhs: Callable[[float, np.ndarray], np.ndarray], t0: float, t1: float,
              y0: np.ndarray, tol: float = 1e-11, max_steps: int = 200_000) -> np.ndarray:
    """Integrate y' = rhs(t, y) from t0 to t1; y has shape (n_state, batch).

    The step is accepted when max |err| / (tol * (1 + |y|)) <= 1.
    """
    y = np.array(y0, dtype=complex)
    t = float(t0)
    span = float(t1) - t
    if span == 0:
        return y
    direction = np.sign(span)
    h = direction * min(abs(span), 1e-3 * abs(span) + 1e-3)
    h_min = 1e-14 * max(1.0, abs(span))
    k = [None] * 7
    k[0] = rhs(t, y)
    for _ in range(max_steps):
        if direction * (t + h - t1) > 0:
            h = t1 - t
        with np.errstate(invalid="ignore", over="ignore"):
            for s in range(1, 7):
                ys = y + h * sum(a * k[j] for j, a in enumerate(_A[s]) if a != 0.0)
                k[s] = rhs(t + _C[s] * h, ys)
        y_new = ys  # stage 7 evaluates at the 5th-order solution (FSAL)
        with np.errstate(invalid="ignore", over="ignore"):
            err = h * sum(e * k[j] for j, e in enumerate(_E) if e != 0.0)
            scale = tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
            ratio = float(np.max(np.abs(err) / scale)) if err.size else 0.0
        if not (np.all(np.isfinite(y_new)) and math.isfinite(ratio)):
            ratio = math.inf  # overflow: reject and shrink
        if ratio <= 1.0:
            t += h
            y = y_new
            k[0] = k[6]
            if direction * (t - t1) >= -1e-15 * abs(span):
                return y
        factor = 0.9 * ratio ** (-0.2) if ratio > 0 else 5.0  # inf ** -0.2 == 0 -> clamp 0.2
        h *= min(5.0, max(0.2, factor))
        if abs(h) < h_min:
            raise StepSizeUnderflow(f"step size underflow at t={t}")
    raise StepSizeUnderflow("maximum number of steps exceeded")
