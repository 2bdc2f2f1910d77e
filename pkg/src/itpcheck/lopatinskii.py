"""Shapiro-Lopatinskii condition at boundary frames.

At a boundary point the coefficients are rotated into the local frame
(tangents first, normal last). The condition reduces to det B(tau) != 1 on
unit tangential vectors tau, or Re a_dd < 0, where B is the 2x2 symbol block

    B = [[sum_{i,j<d} a_ij tau_i tau_j,  sum_{i<d} a_id tau_i],
         [sum_{i<d} a_id tau_i,          a_dd              ]].

For d = 2 the same construction gives B = [[a11 tau^2, a12 tau], [a12 tau, a22]]
and det B = det A * tau^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .ellipticity import DEFAULT_TOL, EllipticityReport, check_elliptic
from .fields import BoundaryFrame, CoefficientField, DomainGeometry, SampleGrid, eval_field, sample
from .minimize import polish_angle

DEFAULT_TAU_RESOLUTION = 720


class BranchError(ValueError):
    pass


class NonEllipticFieldError(ValueError):
    def __init__(self, report: EllipticityReport):
        self.report = report
        super().__init__(
            f"non-elliptic field: margin {report.worst_margin:.3e} at x={tuple(report.witness_point)}"
        )


@dataclass(frozen=True)
class RotatedCoefficients:
    Atilde: np.ndarray
    n_boundary: complex = 1.0
    frame: BoundaryFrame | None = None

    @property
    def dimension(self) -> int:
        return self.Atilde.shape[0]

    def a(self, i: int, j: int) -> complex:
        """1-based entry a_ij."""
        return complex(self.Atilde[i - 1, j - 1])

    @property
    def a_dd(self) -> complex:
        return complex(self.Atilde[-1, -1])

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.Atilde.imag == 0))


@dataclass(frozen=True)
class TangentialSymbol:
    tau: np.ndarray
    B: np.ndarray
    detB: complex


@dataclass(frozen=True)
class SLVerdict:
    frame: BoundaryFrame | None
    passed: bool
    detB_margin: float
    re_a_dd: float
    used_clause: str
    lambda0_witness: complex | None
    tau_witness: np.ndarray | None = None


def rotate_to_frame(A, frame: BoundaryFrame, n_boundary: complex = 1.0) -> RotatedCoefficients:
    A = np.asarray(A, dtype=complex)
    C = frame.transfer
    At = C @ A @ C.T
    upper = np.triu(At)
    At = upper + np.triu(At, 1).T
    return RotatedCoefficients(At, complex(n_boundary), frame)


def _tangential_parts(At: np.ndarray, taus: np.ndarray):
    """(sum a_ij tau_i tau_j, sum a_id tau_i) for rows of taus, shape (m, d-1)."""
    T = At[:-1, :-1]
    col = At[:-1, -1]
    quad = np.einsum("ni,ij,nj->n", taus, T, taus)
    mixed = taus @ col
    return quad, mixed


def _detB(At: np.ndarray, taus: np.ndarray) -> np.ndarray:
    quad, mixed = _tangential_parts(At, taus)
    return At[-1, -1] * quad - mixed * mixed


def tangential_symbol(rot: RotatedCoefficients, tau) -> TangentialSymbol:
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if tau.shape != (rot.dimension - 1,):
        raise ValueError("tau must have d-1 components")
    if not np.any(tau):
        raise ValueError("tau must be nonzero")
    quad, mixed = (complex(v[0]) for v in _tangential_parts(rot.Atilde, tau[None, :]))
    B = np.array([[quad, mixed], [mixed, rot.a_dd]], dtype=complex)
    return TangentialSymbol(tau, B, quad * rot.a_dd - mixed * mixed)


@dataclass(frozen=True)
class MMatrix:
    M: np.ndarray
    det: complex
    real_criterion: bool | None


def m_matrix(rot: RotatedCoefficients) -> MMatrix:
    """M = a33 T - c c^T - I, so tau^T M tau = det B(tau) - |tau|^2 (d = 3)."""
    if rot.dimension != 3:
        raise ValueError("the M matrix is defined for d = 3")
    a = rot.a
    M = np.array([
        [a(3, 3) * a(1, 1) - a(1, 3) ** 2, a(3, 3) * a(1, 2) - a(1, 3) * a(2, 3)],
        [a(3, 3) * a(2, 1) - a(1, 3) * a(2, 3), a(3, 3) * a(2, 2) - a(2, 3) ** 2],
    ]) - np.eye(2)
    det = complex(np.linalg.det(M)) if not np.all(M == 0) else 0j
    crit = bool(det.real > 0) if rot.is_real else None
    return MMatrix(M, det, crit)


def _branch(sqrt_candidate: complex, a_dd: complex, tol: float) -> complex:
    ratio = sqrt_candidate / a_dd
    if abs(ratio.real) <= tol * max(1.0, abs(ratio)):
        raise BranchError("branch undefined (non-elliptic symbol)")
    return sqrt_candidate if ratio.real > 0 else -sqrt_candidate


def lambda0(rot: RotatedCoefficients, tau, tol: float = 1e-12) -> complex:
    """Root with negative real part of a_dd L^2 + 2i m L - q = 0.

    m = sum a_id tau_i and q = sum a_ij tau_i tau_j; the square root of det B
    is taken with Re(sqrt(det B)/a_dd) > 0.
    """
    sym = tangential_symbol(rot, tau)
    quad, mixed = sym.B[0, 0], sym.B[0, 1]
    a_dd = rot.a_dd
    if a_dd == 0:
        raise BranchError("a_dd = 0: branch undefined (non-elliptic symbol)")
    root = _branch(complex(np.sqrt(sym.detB)), a_dd, tol)
    return (-1j * mixed - root) / a_dd


def characteristic_residual(rot: RotatedCoefficients, tau, lam: complex) -> complex:
    sym = tangential_symbol(rot, tau)
    quad, mixed = sym.B[0, 0], sym.B[0, 1]
    return rot.a_dd * lam * lam + 2j * mixed * lam - quad


def unit_taus(dimension: int, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Angles and unit tangential vectors; d=2 uses tau = +-1."""
    if dimension == 2:
        return np.array([0.0, math.pi]), np.array([[1.0], [-1.0]])
    t = 2 * math.pi * np.arange(resolution) / resolution
    return t, np.column_stack([np.cos(t), np.sin(t)])


def detB_margin(rot: RotatedCoefficients, tau_resolution: int = DEFAULT_TAU_RESOLUTION) -> tuple[float, np.ndarray]:
    """min over unit tau of |det B(tau) - 1| and the minimizing tau."""
    At = rot.Atilde
    if rot.dimension == 2:
        det = complex(At[0, 0] * At[1, 1] - At[0, 1] * At[1, 0])
        return abs(det - 1), np.array([1.0])
    if tau_resolution < 360:
        raise ValueError("tau resolution must be >= 360")
    angles, taus = unit_taus(3, tau_resolution)
    vals = np.abs(_detB(At, taus) - 1)

    def f(t):
        return float(abs(_detB(At, np.array([[math.cos(t), math.sin(t)]]))[0] - 1))

    val, t = polish_angle(f, angles, vals)
    return val, np.array([math.cos(t), math.sin(t)])


def sl_verdict(rot: RotatedCoefficients, tau_resolution: int = DEFAULT_TAU_RESOLUTION,
               tol: float = DEFAULT_TOL) -> SLVerdict:
    margin, tau = detB_margin(rot, tau_resolution)
    re_add = rot.a_dd.real
    if margin > tol:
        passed, clause = True, "detBClause"
    elif re_add < -tol:
        passed, clause = True, "negativeRealClause"
    else:
        passed, clause = False, "detBClause"
    try:
        lam = lambda0(rot, tau)
    except BranchError:
        lam = None
    return SLVerdict(rot.frame, passed, float(margin), float(re_add), clause, lam, tau)


@dataclass(frozen=True)
class SLScan:
    verdicts: list[SLVerdict]
    ellipticity: EllipticityReport

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def worst(self) -> SLVerdict:
        return min(self.verdicts, key=lambda v: v.detB_margin)

    @property
    def min_margin(self) -> float:
        return self.worst.detB_margin

    def __iter__(self):
        return iter(self.verdicts)

    def __len__(self):
        return len(self.verdicts)


def rotated_at(field: CoefficientField, frame: BoundaryFrame) -> RotatedCoefficients:
    A, n = eval_field(field, frame.point)
    return rotate_to_frame(A, frame, n)


def sl_scan(field: CoefficientField, geometry: DomainGeometry, resolution=16,
            grid: SampleGrid | None = None, tau_resolution: int = DEFAULT_TAU_RESOLUTION,
            tol: float = DEFAULT_TOL) -> SLScan:
    """Check ellipticity on the closure, then the SL condition at every boundary frame."""
    from ._workers import thread_map

    if grid is None:
        grid = sample(geometry, resolution)
    report = check_elliptic(field, grid, tol)
    if not report.elliptic:
        raise NonEllipticFieldError(report)
    frames = grid.frames(geometry)
    rots = [rotated_at(field, fr) for fr in frames]
    # frames with identical frozen coefficients share one verdict computation
    keys = [r.Atilde.tobytes() + repr(complex(r.n_boundary)).encode() for r in rots]
    first: dict[bytes, int] = {}
    for j, key in enumerate(keys):
        first.setdefault(key, j)
    unique = sorted(first.values())
    computed = dict(zip(unique, thread_map(lambda j: sl_verdict(rots[j], tau_resolution, tol), unique)))
    verdicts = [replace(computed[first[key]], frame=fr) for key, fr in zip(keys, frames)]
    return SLScan(verdicts, report)


def remark2_check(rot: RotatedCoefficients) -> bool:
    """Sufficient condition A > I or 0 < A < I (real symmetric A only)."""
    if not rot.is_real:
        raise ValueError("remark2_check needs a real symmetric matrix")
    w = np.linalg.eigvalsh(rot.Atilde.real)
    return bool(w[0] > 1 or (w[0] > 0 and w[-1] < 1))
