"""Checks of the two constructions whose eigenvalues fill the complex plane."""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from ..fields import CoefficientField, Cube, Disk, eval_field, sample
from ..lopatinskii import NonEllipticFieldError, SLScan, sl_scan
from .radial import RadialProblem, dispersion, ramp_profile

CUBE_TOL = 1e-10
DISK_TOL = 1e-9


@dataclass(frozen=True)
class CubeCase:
    k: complex
    a: complex = 1.0
    b: complex = 0.0
    resolution: int = 6


@dataclass(frozen=True)
class CubeResidual:
    case: CubeCase
    interior_u: float
    interior_v: float
    dirichlet: float
    neumann: float
    trivial: bool

    @property
    def max_residual(self) -> float:
        return max(self.interior_u, self.interior_v, self.dirichlet, self.neumann)

    @property
    def passed(self) -> bool:
        return self.max_residual < CUBE_TOL


def diag123_cube_field() -> CoefficientField:
    return CoefficientField.constant(np.diag([1.0, 2.0, 3.0]), 1.0, Cube(1.0))


def _ansatz(case: CubeCase, x1):
    """u = v = a cos(k x1) + b sin(k x1) with exact first and second x1-derivatives."""
    k, a, b = complex(case.k), complex(case.a), complex(case.b)
    c, s = np.cos(k * x1), np.sin(k * x1)
    val = a * c + b * s
    d1 = k * (-a * s + b * c)
    d2 = -k * k * (a * c + b * s)
    return val, d1, d2


def validate_cube(case: CubeCase, field_: CoefficientField | None = None) -> CubeResidual:
    """Residuals of the ITP equations and transmission conditions for the trig ansatz."""
    field_ = field_ or diag123_cube_field()
    cube = Cube(1.0)
    N = case.resolution
    ticks = np.linspace(0.0, 1.0, N)
    k2 = complex(case.k) ** 2
    res_u = res_v = 0.0
    umax = 0.0
    for x in np.stack(np.meshgrid(ticks, ticks, ticks, indexing="ij"), axis=-1).reshape(-1, 3):
        A, n = eval_field(field_, x)
        val, d1, d2 = _ansatz(case, x[0])
        H = np.zeros((3, 3), dtype=complex)
        H[0, 0] = d2
        res_u = max(res_u, abs(np.trace(H) + k2 * val))
        res_v = max(res_v, abs(np.sum(A * H) + k2 * n * val))
        umax = max(umax, abs(val))
    res_d = res_n = 0.0
    for p in cube.boundary_params(N):
        fr = cube.frame(p)
        A, _ = eval_field(field_, fr.point)
        u, du, _ = _ansatz(case, fr.point[0])
        v, dv, _ = _ansatz(case, fr.point[0])
        grad_u = np.array([du, 0.0, 0.0], dtype=complex)
        grad_v = np.array([dv, 0.0, 0.0], dtype=complex)
        res_d = max(res_d, abs(u - v))
        res_n = max(res_n, abs(fr.normal @ grad_u - fr.normal @ (A @ grad_v)))
    return CubeResidual(case, res_u, res_v, res_d, res_n, bool(umax < 1e-14))


def sample_ks(count: int, radius: float, seed: int = 0) -> np.ndarray:
    """Deterministic complex samples spread over the disk |k| <= radius (k != 0)."""
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(0.01, 1.0, count))
    th = rng.uniform(0.0, 2 * np.pi, count)
    return r * np.exp(1j * th)


@dataclass(frozen=True)
class DiskValidation:
    problem: RadialProblem
    ks: np.ndarray
    max_abs_dispersion: float
    sl: SLScan | None
    sl_error: str = ""

    @property
    def identically_zero(self) -> bool:
        return self.max_abs_dispersion < DISK_TOL

    @property
    def sl_passed(self) -> bool:
        return self.sl is not None and self.sl.passed


def ramped_disk_field(a1: float = 2.0, n: complex = 1.0, radius: float = 1.0) -> CoefficientField:
    disk = Disk(radius)
    return CoefficientField.radial_polar(ramp_profile(a1, 0.5, radius), n, disk)


def validate_disk(problem: RadialProblem, ks, resolution: int = 16,
                  boundary_resolution: int = 360) -> DiskValidation:
    """|D_0| over the sampled k together with the SL scan of the same field."""
    if complex(problem.c_scale) != 1:
        raise ValueError("validate_disk needs c = 1")
    if problem.alpha != 1:
        raise ValueError("validate_disk needs the ramped-disk operator (alpha = 1)")
    ks = np.asarray(ks, dtype=complex)
    D = dispersion(problem.with_(mode=0), ks)
    field_ = CoefficientField.radial_polar(
        problem.a_profile or (lambda r: problem.alpha), problem.n0, Disk(problem.radius),
        problem.match_radius)
    grid = sample(Disk(problem.radius), resolution, boundary=boundary_resolution)
    try:
        scan = sl_scan(field_, Disk(problem.radius), grid=grid)
        err = ""
    except NonEllipticFieldError as exc:
        scan, err = None, str(exc)
    return DiskValidation(problem, ks, float(np.max(np.abs(D))), scan, err)
