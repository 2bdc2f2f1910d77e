"""Transmission eigenvalues of radially symmetric disk problems.

For angular mode m, u = J_m(k r) e^{i m phi} solves the Helmholtz equation
and v(r) e^{i m phi} solves

    alpha (v'' + v'/r) - a(r) m^2 v / r^2 + c n0 k^2 v = 0,

which is the anisotropic equation with A = alpha r r^T + a(r) phi phi^T and
n = c n0. Inside the match radius a = alpha, so v is an exact Bessel function
there and the ODE is only integrated over [match_radius, R]. The matching
determinant of the homogeneous transmission conditions at r = R is

    D_m(k) = u(R) * alpha v'(R) - u'(R) * v(R).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bessel import bessel_j, bessel_j_prime
from .contour import ZeroCount, count_zeros
from .rk import integrate

DEFAULT_RECT = (0.5, 8.0, -0.5, 0.5)
ODE_TOL = 1e-11


def smootherstep(t):
    """C^2 monotone ramp 0 -> 1 on [0, 1]."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10 - 15 * t + 6 * t * t)


def ramp_profile(a1: float, match_radius: float = 0.5, radius: float = 1.0) -> Callable:
    """a(r) = 1 for r <= match_radius, ramping smoothly to a(radius) = a1."""
    def a(r):
        return 1.0 + (a1 - 1.0) * smootherstep((np.asarray(r, dtype=float) - match_radius) / (radius - match_radius))
    return a


@dataclass(frozen=True)
class RadialProblem:
    radius: float = 1.0
    a_profile: Callable | None = None
    c_scale: complex = 1.0
    mode: int = 0
    match_radius: float = 0.5
    alpha: float = 1.0
    n0: complex = 1.0
    label: str = ""

    def __post_init__(self):
        if not self.radius > self.match_radius > 0:
            raise ValueError("need 0 < match_radius < radius")
        if self.mode < 0 or int(self.mode) != self.mode:
            raise ValueError("mode must be a nonnegative integer")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        rs = np.linspace(0.0, self.match_radius, 33)
        if np.max(np.abs(self.a(rs) - self.alpha)) > 1e-14:
            raise ValueError("a(r) must equal alpha on [0, match_radius]")

    def a(self, r):
        if self.a_profile is None:
            return np.full(np.shape(r), self.alpha, dtype=float)
        return np.asarray(self.a_profile(r), dtype=float)

    def with_(self, **kw) -> "RadialProblem":
        data = dict(radius=self.radius, a_profile=self.a_profile, c_scale=self.c_scale,
                    mode=self.mode, match_radius=self.match_radius, alpha=self.alpha,
                    n0=self.n0, label=self.label)
        data.update(kw)
        return RadialProblem(**data)

    @property
    def wave_factor(self) -> complex:
        """Principal sqrt(c n0 / alpha): v = J_m(wave_factor * k r) near the origin."""
        return cmath.sqrt(complex(self.c_scale) * complex(self.n0) / self.alpha)

    @property
    def is_bessel(self) -> bool:
        """True when a == alpha everywhere, i.e. v has a closed form on the whole disk."""
        rs = np.linspace(0.0, self.radius, 257)
        return bool(np.max(np.abs(self.a(rs) - self.alpha)) <= 1e-14)


def radial_v(problem: RadialProblem, k, tol: float = ODE_TOL, flip_branch: bool = False):
    """(v(R), v'(R)) for scalar or array k by shooting from the match radius."""
    k_arr = np.atleast_1d(np.asarray(k, dtype=complex))
    if np.any(k_arr == 0):
        raise ValueError("k = 0 is excluded")
    m = problem.mode
    kappa = problem.wave_factor * k_arr
    if flip_branch:
        kappa = -kappa
    r0, R = problem.match_radius, problem.radius
    v0 = np.asarray(bessel_j(m, kappa * r0))
    dv0 = kappa * np.asarray(bessel_j_prime(m, kappa * r0))
    ck2 = complex(problem.c_scale) * complex(problem.n0) * k_arr**2
    alpha = problem.alpha
    m2 = m * m

    def rhs(r, y):
        v, w = y  # w = alpha v'
        return np.array([w / alpha, -w / r + (problem.a(r) * m2 / (r * r)) * v - ck2 * v])

    y = integrate(rhs, r0, R, np.array([v0, alpha * dv0]), tol=tol)
    v, dv = y[0], y[1] / alpha
    if np.ndim(k) == 0:
        return complex(v[0]), complex(dv[0])
    return v, dv


def dispersion(problem: RadialProblem, k, tol: float = ODE_TOL, flip_branch: bool = False):
    """D_m(k) = u(R) alpha v'(R) - u'(R) v(R) with u = J_m(k r)."""
    k_arr = np.atleast_1d(np.asarray(k, dtype=complex))
    m, R = problem.mode, problem.radius
    v, dv = radial_v(problem, k_arr, tol, flip_branch)
    u = np.asarray(bessel_j(m, k_arr * R))
    du = k_arr * np.asarray(bessel_j_prime(m, k_arr * R))
    D = u * problem.alpha * dv - du * v
    return complex(D[0]) if np.ndim(k) == 0 else D


def dispersion_closed_form(problem: RadialProblem, k):
    """Closed form of D_m when a == alpha on the whole disk."""
    if not problem.is_bessel:
        raise ValueError("closed form needs a == alpha everywhere")
    k = np.asarray(k, dtype=complex)
    m, R = problem.mode, problem.radius
    kappa = problem.wave_factor * k
    u = np.asarray(bessel_j(m, k * R))
    du = k * np.asarray(bessel_j_prime(m, k * R))
    v = np.asarray(bessel_j(m, kappa * R))
    dv = kappa * np.asarray(bessel_j_prime(m, kappa * R))
    return u * problem.alpha * dv - du * v


@dataclass(frozen=True)
class DispersionFunction:
    problem: RadialProblem
    tol: float = ODE_TOL

    def __call__(self, k):
        return dispersion(self.problem, k, self.tol)


def probe_grid(rect, n: int = 10) -> np.ndarray:
    x0, x1, y0, y1 = rect
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    return (xs[None, :] + 1j * ys[:, None]).ravel()


IDENTICALLY_ZERO = 1e-9


@dataclass(frozen=True)
class CScanResult:
    c: complex
    identically_zero: bool
    probe_max: float
    zeros: ZeroCount | None = None

    @property
    def count(self) -> int | None:
        return None if self.zeros is None else self.zeros.count


def c_scan(problem: RadialProblem, c_values, rect=DEFAULT_RECT, contour_resolution: int = 256,
           refine: bool = True, probe: int = 10) -> list[CScanResult]:
    """For each scale c of n: flag identically vanishing D_m, else count its zeros in rect."""
    from .._workers import thread_map

    def one(c):
        f = DispersionFunction(problem.with_(c_scale=complex(c)))
        pmax = float(np.max(np.abs(f(probe_grid(rect, probe)))))
        if pmax < IDENTICALLY_ZERO:
            return CScanResult(complex(c), True, pmax)
        zc = count_zeros(f, rect, contour_resolution, refine=refine)
        return CScanResult(complex(c), False, pmax, zc)

    return thread_map(one, list(c_values))
