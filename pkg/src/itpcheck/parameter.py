"""Parameter-ellipticity along rays k = e^{i phi} rho.

Both conditions are homogeneous of degree two, so they are checked on the
slice |sigma|^2 + rho^2 = 1 (interior) and |tau|^2 + rho^2 = 1 (boundary).
Writing w = |sigma|^2 the interior symbol on the slice is

    P = -w q(x, s) + (1 - w) e^{2 i phi} n(x),   q = s.A(x)s,  |s| = 1,

an affine function of w, so the minimum over w is the distance from 0 to a
segment and is computed in closed form. The boundary expression
det B - |tau|^2 - (a_dd n - 1) k^2 reduces the same way because det B is
quadratic in tau. Only the remaining direction / frame variables are
sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ellipticity import DEFAULT_TOL, check_elliptic
from .fields import BoundaryFrame, CoefficientField, DomainGeometry, SampleGrid, eval_field, sample
from .lopatinskii import (
    DEFAULT_TAU_RESOLUTION, _detB, m_matrix, rotated_at, sl_verdict, unit_taus,
)
from .minimize import polish_angle, polish_sphere, segment_distance

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class Ray:
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)

    @property
    def unit(self) -> complex:
        return complex(math.cos(self.phi), math.sin(self.phi))

    def k(self, rho: float) -> complex:
        return self.unit * rho


@dataclass(frozen=True)
class InteriorMinimizer:
    point: np.ndarray
    sigma: np.ndarray
    rho: float


@dataclass(frozen=True)
class BoundaryMinimizer:
    frame: BoundaryFrame
    tau: np.ndarray
    rho: float


@dataclass(frozen=True)
class RayMarginReport:
    ray: Ray
    condition_i_margin: float
    condition_ii_margin: float
    minimizer_i: InteriorMinimizer | None
    minimizer_ii: BoundaryMinimizer | None
    tolerance: float = DEFAULT_TOL

    @property
    def admissible(self) -> bool:
        return self.condition_i_margin > self.tolerance and self.condition_ii_margin > self.tolerance

    @property
    def score(self) -> float:
        return min(self.condition_i_margin, self.condition_ii_margin)


def interior_symbol(field: CoefficientField, x, sigma, k: complex) -> complex:
    A, n = eval_field(field, x)
    sigma = np.asarray(sigma, dtype=float)
    return complex(-(sigma @ A @ sigma) + k * k * n)


@dataclass
class InteriorSamples:
    points: np.ndarray
    directions: np.ndarray
    A: list
    q: np.ndarray          # (points, directions)
    n: np.ndarray          # (points,)

    @classmethod
    def build(cls, field: CoefficientField, grid: SampleGrid) -> "InteriorSamples":
        mats, ns, pts, seen = [], [], [], set()
        for x in grid.interior:
            A, n = eval_field(field, x)
            key = A.tobytes() + complex(n).__repr__().encode()
            if key in seen:
                continue  # identical symbol data cannot change the minimum
            seen.add(key)
            mats.append(A)
            ns.append(n)
            pts.append(x)
        S = grid.directions
        q = np.array([np.einsum("ni,ij,nj->n", S, A, S) for A in mats])
        return cls(np.array(pts), S, mats, q, np.array(ns, dtype=complex))

    def margins(self, phi: float) -> tuple[np.ndarray, np.ndarray]:
        rot = np.exp(2j * phi)
        return segment_distance(rot * self.n[:, None], -self.q)


@dataclass
class BoundarySamples:
    frames: list
    angles: np.ndarray
    taus: np.ndarray
    Atilde: list
    detB1: np.ndarray      # (frames, taus) values det B(tau) - 1
    s: np.ndarray          # (frames,) values a_dd n(x0) - 1

    @classmethod
    def build(cls, field: CoefficientField, geometry: DomainGeometry, grid: SampleGrid,
              tau_resolution: int = DEFAULT_TAU_RESOLUTION) -> "BoundarySamples":
        frames, rots, seen = [], [], set()
        for fr in grid.frames(geometry):
            r = rotated_at(field, fr)
            key = r.Atilde.tobytes() + complex(r.n_boundary).__repr__().encode()
            if key in seen:
                continue
            seen.add(key)
            frames.append(fr)
            rots.append(r)
        angles, taus = unit_taus(geometry.dimension, tau_resolution)
        detB1 = np.array([_detB(r.Atilde, taus) - 1 for r in rots])
        s = np.array([r.a_dd * r.n_boundary - 1 for r in rots], dtype=complex)
        return cls(frames, angles, taus, [r.Atilde for r in rots], detB1, s)

    def margins(self, phi: float) -> tuple[np.ndarray, np.ndarray]:
        rot = np.exp(2j * phi)
        return segment_distance(-self.s[:, None] * rot, self.detB1)


def _interior_min(samples: InteriorSamples, phi: float, polish: bool):
    vals, ws = samples.margins(phi)
    i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
    margin, w, direction = float(vals[i, j]), float(ws[i, j]), samples.directions[j]
    if polish and margin > 0:
        A, n = samples.A[i], samples.n[i]
        p0 = np.exp(2j * phi) * n

        def f_dir(s):
            return float(segment_distance(p0, -(s @ A @ s))[0])

        if samples.directions.shape[1] == 2:
            th = np.arctan2(samples.directions[:, 1], samples.directions[:, 0])
            order = np.argsort(th)
            val, t = polish_angle(lambda t: f_dir(np.array([math.cos(t), math.sin(t)])),
                                  th[order], vals[i, order])
            cand = np.array([math.cos(t), math.sin(t)])
        else:
            val, cand = polish_sphere(f_dir, direction)
        if val < margin:
            margin, direction = val, cand
            w = float(segment_distance(p0, -(cand @ A @ cand))[1])
    mini = InteriorMinimizer(np.array(samples.points[i]), math.sqrt(w) * np.asarray(direction),
                             math.sqrt(max(0.0, 1 - w)))
    return margin, mini


def _boundary_min(samples: BoundarySamples, phi: float, polish: bool):
    vals, ws = samples.margins(phi)
    f, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
    margin, w, tau = float(vals[f, j]), float(ws[f, j]), samples.taus[j]
    if polish and margin > 0 and samples.taus.shape[1] == 2:
        At = samples.Atilde[f]
        p0 = -samples.s[f] * np.exp(2j * phi)

        def g(t):
            d = _detB(At, np.array([[math.cos(t), math.sin(t)]]))[0] - 1
            return float(segment_distance(p0, d)[0])

        val, t = polish_angle(g, samples.angles, vals[f])
        if val < margin:
            margin, tau = val, np.array([math.cos(t), math.sin(t)])
            d = _detB(At, tau[None, :])[0] - 1
            w = float(segment_distance(p0, d)[1])
    mini = BoundaryMinimizer(samples.frames[f], math.sqrt(w) * np.asarray(tau),
                             math.sqrt(max(0.0, 1 - w)))
    return margin, mini


def _grid(field, geometry, grid, resolution):
    if grid is not None:
        return grid
    if geometry is None:
        geometry = field.domain
    if geometry is None:
        raise ValueError("a geometry or sample grid is required")
    return sample(geometry, resolution)


def condition_i_margin(field: CoefficientField, ray: Ray, grid: SampleGrid | None = None,
                       resolution: int = 16, polish: bool = True):
    """c = min |P(x, sigma, k)| over x and |sigma|^2 + |k|^2 = 1, k on the ray."""
    grid = _grid(field, None, grid, resolution)
    return _interior_min(InteriorSamples.build(field, grid), ray.phi, polish)


def condition_ii_margin(field: CoefficientField, geometry: DomainGeometry, ray: Ray,
                        grid: SampleGrid | None = None, resolution: int = 16,
                        tau_resolution: int = DEFAULT_TAU_RESOLUTION, polish: bool = True):
    """a = min |det B - |tau|^2 - (a_dd n - 1) k^2| over frames and |tau|^2 + |k|^2 = 1."""
    grid = _grid(field, geometry, grid, resolution)
    samples = BoundarySamples.build(field, geometry, grid, tau_resolution)
    return _boundary_min(samples, ray.phi, polish)


def ray_margins(field, geometry, ray: Ray, grid=None, resolution=16,
                tau_resolution=DEFAULT_TAU_RESOLUTION, tol=DEFAULT_TOL) -> RayMarginReport:
    grid = _grid(field, geometry, grid, resolution)
    mi, wi = condition_i_margin(field, ray, grid)
    mii, wii = condition_ii_margin(field, geometry, ray, grid, tau_resolution=tau_resolution)
    return RayMarginReport(ray, mi, mii, wi, wii, tol)


@dataclass(frozen=True)
class RayScan:
    reports: list[RayMarginReport]
    best: RayMarginReport

    @property
    def admissible(self) -> list[Ray]:
        return [r.ray for r in self.reports if r.admissible]


def ray_scan(field: CoefficientField, geometry: DomainGeometry, phi_resolution: int = 360,
             grid: SampleGrid | None = None, resolution: int = 16,
             tau_resolution: int = DEFAULT_TAU_RESOLUTION, tol: float = DEFAULT_TOL) -> RayScan:
    """Grid margins for every ray on a uniform phi grid; the best ray is re-polished."""
    grid = _grid(field, geometry, grid, resolution)
    interior = InteriorSamples.build(field, grid)
    boundary = BoundarySamples.build(field, geometry, grid, tau_resolution)
    reports = []
    for j in range(phi_resolution):
        phi = TWO_PI * j / phi_resolution
        mi, wi = _interior_min(interior, phi, polish=False)
        mii, wii = _boundary_min(boundary, phi, polish=False)
        reports.append(RayMarginReport(Ray(phi), mi, mii, wi, wii, tol))
    top = max(reports, key=lambda r: r.score)
    mi, wi = _interior_min(interior, top.ray.phi, polish=True)
    mii, wii = _boundary_min(boundary, top.ray.phi, polish=True)
    best = RayMarginReport(top.ray, mi, mii, wi, wii, tol)
    return RayScan(reports, best)


def avoid_ray(values, min_gap: float = math.radians(5.0)) -> float | None:
    """Direction of a ray from 0 that stays clear of the given complex values.

    Returns the midpoint of the widest angular gap between the arguments of
    the nonzero values (ties go to the smallest angle) when that gap exceeds
    ``2 * min_gap``; otherwise None.
    """
    v = np.asarray(values, dtype=complex).ravel()
    v = v[np.isfinite(v) & (v != 0)]
    if v.size == 0:
        return 0.0
    args = np.sort(np.angle(v) % TWO_PI)
    gaps = np.diff(np.append(args, args[0] + TWO_PI))
    widest = float(np.max(gaps))
    if widest <= 2 * min_gap:
        return None
    cands = np.flatnonzero(gaps >= widest - 1e-12)
    mids = (args[cands] + 0.5 * gaps[cands]) % TWO_PI
    return float(np.min(mids))


CASES = ("realRealDetCriterion", "realAComplexN", "complexRayAvoidance", "none")


@dataclass(frozen=True)
class CorollaryVerdict:
    case: str
    ray: Ray | None
    value_ranges: dict = field(default_factory=dict)
    margins: RayMarginReport | None = None
    reason: str = ""
    witness: object = None


def _small_phi_candidates(step_deg: float = 5.0):
    out = []
    k = 1
    while k * step_deg < 90:
        out += [math.radians(k * step_deg), -math.radians(k * step_deg)]
        k += 1
    return out


def corollary_classify(field: CoefficientField, geometry: DomainGeometry,
                       grid: SampleGrid | None = None, resolution: int = 16,
                       tau_resolution: int = DEFAULT_TAU_RESOLUTION, tol: float = DEFAULT_TOL,
                       epsilon: float = 1e-3, min_gap: float = math.radians(5.0)) -> CorollaryVerdict:
    """Match the data against the three sufficient-condition cases for discreteness."""
    grid = _grid(field, geometry, grid, resolution)
    ell = check_elliptic(field, grid, tol)
    if not ell.elliptic:
        return CorollaryVerdict("none", None, reason="matrix field is not elliptic",
                                witness=tuple(ell.witness_point))
    interior = InteriorSamples.build(field, grid)
    boundary = BoundarySamples.build(field, geometry, grid, tau_resolution)
    with np.errstate(divide="ignore", invalid="ignore"):
        ranges = {
            "sigmaAsigma_over_n": (interior.q / np.where(interior.n != 0, interior.n, np.nan)[:, None]).ravel(),
            "boundary_quotient": (boundary.detB1 / np.where(boundary.s != 0, boundary.s, np.nan)[:, None]).ravel(),
        }

    j = int(np.argmin(np.abs(interior.n)))
    if abs(interior.n[j]) <= tol:
        return CorollaryVerdict("none", None, ranges, reason="n vanishes in the closure",
                                witness=tuple(interior.points[j]))
    j = int(np.argmin(np.abs(boundary.s)))
    if abs(boundary.s[j]) <= tol:
        return CorollaryVerdict("none", None, ranges, reason="a_dd n(x0) = 1 on the boundary",
                                witness=boundary.frames[j].param)

    real_A = all(np.all(A.imag == 0) for A in interior.A) and all(np.all(A.imag == 0) for A in boundary.Atilde)
    n_b = np.array([eval_field(field, fr.point)[1] for fr in boundary.frames])
    real_n = bool(np.all(interior.n.imag == 0) and np.all(n_b.imag == 0))

    if geometry.dimension == 2:
        det_ok = all(abs(np.linalg.det(At) - 1) > tol for At in boundary.Atilde)
    else:
        det_ok = real_A and all(
            m_matrix(rotated_at(field, fr)).det.real > tol for fr in boundary.frames)

    def confirm(case, phis):
        reports = []
        for phi in phis:
            mi, wi = _interior_min(interior, phi, polish=False)
            mii, wii = _boundary_min(boundary, phi, polish=False)
            reports.append(RayMarginReport(Ray(phi), mi, mii, wi, wii, tol))
        top = max(reports, key=lambda r: r.score)
        mi, wi = _interior_min(interior, top.ray.phi, polish=True)
        mii, wii = _boundary_min(boundary, top.ray.phi, polish=True)
        rep = RayMarginReport(top.ray, mi, mii, wi, wii, tol)
        if rep.admissible:
            return CorollaryVerdict(case, rep.ray, ranges, rep)
        return CorollaryVerdict("none", None, ranges, rep,
                                reason=f"{case} ray could not be confirmed")

    if real_A and det_ok:
        if real_n:
            return confirm("realRealDetCriterion", _small_phi_candidates())
        if float(np.min(np.abs(np.concatenate([interior.n.imag, n_b.imag])))) > epsilon:
            return confirm("realAComplexN", _small_phi_candidates())

    sl_ok = all(sl_verdict(rotated_at(field, fr), tau_resolution, tol).passed for fr in boundary.frames)
    if not sl_ok:
        return CorollaryVerdict("none", None, ranges, reason="Shapiro-Lopatinskii condition fails")
    values = np.concatenate([ranges["sigmaAsigma_over_n"], ranges["boundary_quotient"]])
    phi1 = avoid_ray(values, min_gap)
    if phi1 is None:
        return CorollaryVerdict("none", None, ranges, reason="no ray free from the value sets")
    return confirm("complexRayAvoidance", [(phi1 / 2) % math.pi])
