"""Ellipticity of the matrix field A(x).

In d >= 3 the form xi.A(x)xi must not vanish on real directions. In d = 2 the
quadratic pencil (xi1 + lam xi2).A(xi1 + lam xi2) = 0 must have one root in
each open half plane for every independent real pair (xi1, xi2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import CoefficientField, SampleGrid, eval_field
from .minimize import polish_angle, polish_sphere

DEFAULT_TOL = 1e-8


class DegeneratePencilError(ValueError):
    pass


@dataclass(frozen=True)
class PencilRoots:
    lambda_plus: complex
    lambda_minus: complex
    discriminant: complex
    separated: bool

    @property
    def margin(self) -> float:
        if not self.separated:
            return 0.0
        return min(self.lambda_plus.imag, -self.lambda_minus.imag)


@dataclass(frozen=True)
class EllipticityReport:
    elliptic: bool
    worst_margin: float
    witness_point: np.ndarray
    witness_directions: tuple
    tolerance: float = DEFAULT_TOL


def _quad(A, x, y):
    return complex(np.asarray(x) @ A @ np.asarray(y))


def _stable_roots(a, b, c):
    """Roots of a t^2 + b t + c with the cancellation-free formula (arrays ok)."""
    a, b, c = (np.asarray(v, dtype=complex) for v in (a, b, c))
    disc = b * b - 4 * a * c
    s = np.sqrt(disc)
    s = np.where(np.real(np.conj(b) * s) >= 0, s, -s)
    q = -0.5 * (b + s)
    safe_q = np.where(q != 0, q, 1.0)
    r1 = q / a
    r2 = np.where(q != 0, c / safe_q, -b / (2 * a))
    return r1, r2, disc


def pencil_roots(A, xi1, xi2, tol: float = DEFAULT_TOL) -> PencilRoots:
    """Solve (xi1 + lam xi2).A(xi1 + lam xi2) = 0 and label the roots.

    ``lambda_plus`` has positive imaginary part when the roots straddle the
    real axis; otherwise the roots are ordered by modulus and ``separated`` is
    False, which callers treat as a non-elliptic pair.
    """
    A = np.asarray(A, dtype=complex)
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    n1, n2 = np.linalg.norm(xi1), np.linalg.norm(xi2)
    if n1 == 0 or n2 == 0:
        raise DegeneratePencilError("pencil directions must be nonzero")
    resid = xi2 - (xi1 @ xi2) / (n1 * n1) * xi1
    if np.linalg.norm(resid) <= 1e-12 * n2:
        raise DegeneratePencilError("pencil directions are linearly dependent")
    a = _quad(A, xi2, xi2)
    if abs(a) <= 1e-14 * max(1.0, float(np.max(np.abs(A)))) * n2 * n2:
        raise DegeneratePencilError("degenerate leading coefficient xi2.A.xi2 = 0")
    b = 2 * _quad(A, xi1, xi2)
    c = _quad(A, xi1, xi1)
    r1, r2, disc = (complex(v) for v in _stable_roots(a, b, c))
    if r1.imag > tol and r2.imag < -tol:
        return PencilRoots(r1, r2, disc, True)
    if r2.imag > tol and r1.imag < -tol:
        return PencilRoots(r2, r1, disc, True)
    big, small = (r1, r2) if abs(r1) >= abs(r2) else (r2, r1)
    return PencilRoots(big, small, disc, False)


def _pair_margins_2d(A: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Root-sign margin for the pairs (e(theta), e(theta + pi/2)), vectorized."""
    c_, s_ = np.cos(thetas), np.sin(thetas)
    xi1 = np.stack([c_, s_], axis=-1)
    xi2 = np.stack([-s_, c_], axis=-1)
    a = np.einsum("ni,ij,nj->n", xi2, A, xi2)
    b = 2 * np.einsum("ni,ij,nj->n", xi1, A, xi2)
    c = np.einsum("ni,ij,nj->n", xi1, A, xi1)
    scale = max(1.0, float(np.max(np.abs(A))))
    ok = np.abs(a) > 1e-14 * scale
    r1, r2, _ = _stable_roots(np.where(ok, a, 1.0), b, c)
    hi = np.maximum(r1.imag, r2.imag)
    lo = np.minimum(r1.imag, r2.imag)
    # a zero leading coefficient means xi2 is a real null direction
    return np.where(ok, np.maximum(np.minimum(hi, -lo), 0.0), 0.0)


def _point_margin_2d(A: np.ndarray, thetas: np.ndarray) -> tuple[float, float]:
    vals = _pair_margins_2d(A, thetas)
    if float(np.min(vals)) == 0.0:
        j = int(np.argmin(vals))
        return 0.0, float(thetas[j])
    return polish_angle(lambda t: float(_pair_margins_2d(A, np.array([t]))[0]), thetas, vals)


def _point_margin_nd(A: np.ndarray, dirs: np.ndarray) -> tuple[float, np.ndarray]:
    if np.all(A.imag == 0):
        w, V = np.linalg.eigh(A.real)
        if w[0] < 0 < w[-1] or w[0] == 0 or w[-1] == 0:
            # indefinite: a real null direction mixes the extreme eigenvectors
            lo, hi = w[0], w[-1]
            if lo == 0 or hi == 0:
                vec = V[:, 0] if lo == 0 else V[:, -1]
            else:
                vec = math.sqrt(hi / (hi - lo)) * V[:, 0] + math.sqrt(-lo / (hi - lo)) * V[:, -1]
            return 0.0, vec / np.linalg.norm(vec)
        j = int(np.argmin(np.abs(w)))
        return float(abs(w[j])), V[:, j]
    vals = np.abs(np.einsum("ni,ij,nj->n", dirs, A, dirs))
    order = np.argsort(vals, kind="stable")[:2]
    best, best_dir = float(vals[order[0]]), dirs[order[0]]
    for j in order:
        v, d = polish_sphere(lambda x: abs(complex(x @ A @ x)), dirs[j])
        if v < best:
            best, best_dir = v, d
    return best, best_dir


def _scan(field: CoefficientField, grid: SampleGrid, tol: float, point_margin) -> EllipticityReport:
    cache: dict[bytes, tuple] = {}
    worst = math.inf
    witness = None
    for x in grid.interior:
        A, _ = eval_field(field, x)
        key = A.tobytes()
        if key not in cache:
            cache[key] = point_margin(A)
        margin, w = cache[key]
        # ties resolved by the first point in grid order
        if margin < worst:
            worst, witness = margin, (np.array(x), w)
    point, w = witness
    if field.dimension == 2:
        t = float(w)
        dirs = ((math.cos(t), math.sin(t)), (-math.sin(t), math.cos(t)))
    else:
        dirs = (tuple(np.asarray(w, dtype=float)),)
    return EllipticityReport(bool(worst > tol), float(worst), point, dirs, tol)


def check_elliptic_2d(field: CoefficientField, grid: SampleGrid, tol: float = DEFAULT_TOL) -> EllipticityReport:
    if field.dimension != 2:
        raise ValueError("check_elliptic_2d needs a 2D field")
    thetas = np.arctan2(grid.directions[:, 1], grid.directions[:, 0]) % np.pi
    thetas = np.sort(thetas)
    return _scan(field, grid, tol, lambda A: _point_margin_2d(A, thetas))


def check_elliptic_nd(field: CoefficientField, grid: SampleGrid, tol: float = DEFAULT_TOL) -> EllipticityReport:
    if field.dimension < 3:
        raise ValueError("check_elliptic_nd needs dimension >= 3")
    return _scan(field, grid, tol, lambda A: _point_margin_nd(A, grid.directions))


def check_elliptic(field: CoefficientField, grid: SampleGrid, tol: float = DEFAULT_TOL) -> EllipticityReport:
    if field.dimension == 2:
        return check_elliptic_2d(field, grid, tol)
    return check_elliptic_nd(field, grid, tol)
