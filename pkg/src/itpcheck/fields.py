"""Domains, boundary frames and the coefficient fields A(x), n(x)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np


class DomainError(ValueError):
    """Raised for points outside a domain or undefined boundary frames."""


_ORTHO_TOL = 1e-12


@dataclass(frozen=True)
class BoundaryFrame:
    """Local orthonormal frame at a boundary point.

    ``transfer`` has the tangents as its first rows and the outward normal as
    its last row, so local coordinates are ``y = transfer @ (x - point)``.
    """

    point: np.ndarray
    normal: np.ndarray
    tangents: tuple[np.ndarray, ...]
    param: object = None

    @property
    def dimension(self) -> int:
        return self.point.shape[0]

    @property
    def transfer(self) -> np.ndarray:
        return np.vstack([*self.tangents, self.normal])

    def rotated_tangents(self, angle: float) -> "BoundaryFrame":
        """Same point and normal with the tangent pair rotated in-plane (d=3)."""
        if len(self.tangents) != 2:
            raise ValueError("tangent rotation needs two tangents")
        t1, t2 = self.tangents
        c, s = math.cos(angle), math.sin(angle)
        return BoundaryFrame(self.point, self.normal, (c * t1 + s * t2, -s * t1 + c * t2), self.param)


def _make_frame(point, normal, tangents, param) -> BoundaryFrame:
    point = np.asarray(point, dtype=float)
    normal = np.asarray(normal, dtype=float)
    tangents = tuple(np.asarray(t, dtype=float) for t in tangents)
    frame = BoundaryFrame(point, normal, tangents, param)
    C = frame.transfer
    if np.max(np.abs(C @ C.T - np.eye(C.shape[0]))) > _ORTHO_TOL:
        raise DomainError("boundary frame is not orthonormal")
    return frame


class DomainGeometry:
    """Base class for the supported domains."""

    dimension: int
    kind: str

    def contains(self, point) -> bool:
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def boundary_params(self, count: int) -> list:
        raise NotImplementedError

    def frame(self, param) -> BoundaryFrame:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


def _circle_frame(center_to_point: np.ndarray, theta: float, sign: float, param) -> BoundaryFrame:
    normal = sign * np.array([math.cos(theta), math.sin(theta)])
    tangent = np.array([-math.sin(theta), math.cos(theta)])
    return _make_frame(center_to_point, normal, (tangent,), param)


@dataclass(frozen=True)
class Disk(DomainGeometry):
    radius: float = 1.0
    dimension: int = field(default=2, init=False)
    kind: str = field(default="disk", init=False)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float)
        return p.shape == (2,) and float(np.hypot(*p)) <= self.radius * (1 + 1e-12)

    def bounding_box(self):
        return np.full(2, -self.radius), np.full(2, self.radius)

    def boundary_params(self, count: int) -> list:
        return [2 * math.pi * j / count for j in range(count)]

    def frame(self, param) -> BoundaryFrame:
        theta = float(param)
        if not 0 <= theta < 2 * math.pi + 1e-12:
            raise DomainError(f"disk boundary parameter {theta} outside [0, 2pi)")
        point = self.radius * np.array([math.cos(theta), math.sin(theta)])
        return _circle_frame(point, theta, 1.0, theta)

    def describe(self) -> dict:
        return {"kind": "disk", "radius": self.radius}


@dataclass(frozen=True)
class Annulus(DomainGeometry):
    """Annulus r_in < |x| < r_out.

    Boundary parameters in [0, 2pi) address the outer circle, parameters in
    [2pi, 4pi) the inner circle (angle = param - 2pi).
    """

    r_in: float
    r_out: float
    dimension: int = field(default=2, init=False)
    kind: str = field(default="annulus", init=False)

    def __post_init__(self):
        if not (self.r_in > 0 and self.r_out > 0):
            raise ValueError("annulus radii must be positive")
        if not self.r_in < self.r_out:
            raise ValueError("annulus needs r_in < r_out")

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float)
        r = float(np.hypot(*p))
        return self.r_in * (1 - 1e-12) <= r <= self.r_out * (1 + 1e-12)

    def bounding_box(self):
        return np.full(2, -self.r_out), np.full(2, self.r_out)

    def boundary_params(self, count: int) -> list:
        outer = [2 * math.pi * j / count for j in range(count)]
        return outer + [2 * math.pi + t for t in outer]

    def frame(self, param) -> BoundaryFrame:
        p = float(param)
        if not 0 <= p < 4 * math.pi + 1e-12:
            raise DomainError(f"annulus boundary parameter {p} outside [0, 4pi)")
        if p < 2 * math.pi:
            theta, radius, sign = p, self.r_out, 1.0
        else:
            theta, radius, sign = p - 2 * math.pi, self.r_in, -1.0
        point = radius * np.array([math.cos(theta), math.sin(theta)])
        return _circle_frame(point, theta, sign, p)

    def describe(self) -> dict:
        return {"kind": "annulus", "r_in": self.r_in, "r_out": self.r_out}


_FACE_EPS = 1e-12


@dataclass(frozen=True)
class Cube(DomainGeometry):
    """Axis-aligned cube [0, side]^3; frames exist on open faces only."""

    side: float = 1.0
    dimension: int = field(default=3, init=False)
    kind: str = field(default="cube", init=False)

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError("cube side must be positive")

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float)
        tol = self.side * 1e-12
        return p.shape == (3,) and bool(np.all(p >= -tol) and np.all(p <= self.side + tol))

    def bounding_box(self):
        return np.zeros(3), np.full(3, self.side)

    def boundary_params(self, count: int) -> list:
        """Cell-centred points on each of the six faces, ``count`` per axis."""
        ticks = [(i + 0.5) / count * self.side for i in range(count)]
        params = []
        for axis in range(3):
            for level in (0.0, self.side):
                others = [j for j in range(3) if j != axis]
                for u in ticks:
                    for v in ticks:
                        p = np.empty(3)
                        p[axis] = level
                        p[others[0]], p[others[1]] = u, v
                        params.append(tuple(p))
        return params

    def frame(self, param) -> BoundaryFrame:
        p = np.asarray(param, dtype=float)
        if p.shape != (3,) or not self.contains(p):
            raise DomainError(f"point {param} is not on the cube")
        eps = _FACE_EPS * self.side
        on_low = np.abs(p) <= eps
        on_high = np.abs(p - self.side) <= eps
        hits = np.flatnonzero(on_low | on_high)
        if hits.size == 0:
            raise DomainError(f"point {param} is not on the cube boundary")
        if hits.size > 1:
            raise DomainError("frame undefined at nonsmooth boundary point")
        axis = int(hits[0])
        eye = np.eye(3)
        normal = eye[axis] * (1.0 if on_high[axis] else -1.0)
        tangents = tuple(eye[j] for j in range(3) if j != axis)
        return _make_frame(p, normal, tangents, tuple(float(x) for x in p))

    def describe(self) -> dict:
        return {"kind": "cube", "side": self.side}


@dataclass(frozen=True)
class Curve2D(DomainGeometry):
    """Domain bounded by a closed curve t -> curve(t), t in [0, 2pi).

    ``derivative`` must be the exact derivative of ``curve``. Orientation is
    detected from the signed area so that the frame normal always points
    outward.
    """

    curve: Callable[[float], Sequence[float]]
    derivative: Callable[[float], Sequence[float]]
    label: str = "parametrized2d"
    dimension: int = field(default=2, init=False)
    kind: str = field(default="parametrized2d", init=False)

    def _polygon(self, count: int = 512) -> np.ndarray:
        ts = np.linspace(0.0, 2 * math.pi, count, endpoint=False)
        return np.array([np.asarray(self.curve(t), dtype=float) for t in ts])

    @property
    def orientation(self) -> float:
        poly = self._polygon()
        x, y = poly[:, 0], poly[:, 1]
        area = 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
        return 1.0 if area >= 0 else -1.0

    def contains(self, point) -> bool:
        px, py = (float(c) for c in point)
        poly = self._polygon(2048)
        x, y = poly[:, 0], poly[:, 1]
        x2, y2 = np.roll(x, -1), np.roll(y, -1)
        # distance to the polygon counts as on the closure
        dx, dy = x2 - x, y2 - y
        seg2 = dx * dx + dy * dy
        w = np.clip(((px - x) * dx + (py - y) * dy) / np.where(seg2 > 0, seg2, 1.0), 0, 1)
        dist = np.min(np.hypot(x + w * dx - px, y + w * dy - py))
        # exact curve points sit up to one sagitta outside the inscribed polygon
        if dist <= float(np.max(seg2)):
            return True
        crosses = (y > py) != (y2 > py)
        xs = x + (py - y) * dx / np.where(dy != 0, dy, 1.0)
        return bool(np.count_nonzero(crosses & (px < xs)) % 2)

    def bounding_box(self):
        poly = self._polygon(2048)
        return poly.min(axis=0), poly.max(axis=0)

    def boundary_params(self, count: int) -> list:
        return [2 * math.pi * j / count for j in range(count)]

    def frame(self, param) -> BoundaryFrame:
        t = float(param)
        d = np.asarray(self.derivative(t), dtype=float)
        speed = float(np.hypot(*d))
        if speed < 1e-12:
            raise DomainError(f"curve derivative vanishes at t={t}: degenerate tangent")
        tangent = self.orientation * d / speed
        normal = np.array([tangent[1], -tangent[0]])
        return _make_frame(np.asarray(self.curve(t), dtype=float), normal, (tangent,), t)

    def describe(self) -> dict:
        return {"kind": "parametrized2d", "label": self.label}


def boundary_frame(geometry: DomainGeometry, param) -> BoundaryFrame:
    return geometry.frame(param)


MatrixFn = Callable[[np.ndarray], np.ndarray]
ScalarFn = Callable[[np.ndarray], complex]


@dataclass(frozen=True)
class CoefficientField:
    """The pair (A(x), n(x)); A is symmetrized on every evaluation."""

    dimension: int
    A: MatrixFn
    n: ScalarFn
    source: str = "constant"
    domain: DomainGeometry | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        if self.domain is not None and self.domain.dimension != self.dimension:
            raise ValueError("field and domain dimensions differ")

    @classmethod
    def constant(cls, A, n=1.0, domain=None) -> "CoefficientField":
        A = np.asarray(A, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        A = 0.5 * (A + A.T)
        n = complex(n)
        return cls(A.shape[0], lambda x: A, lambda x: n, "constant", domain,
                   {"A": A.tolist(), "n": n})

    @classmethod
    def radial_polar(cls, profile: Callable[[float], float], n=1.0, domain=None,
                     match_radius: float = 0.5) -> "CoefficientField":
        """A(x) = a(r) I + (1 - a(r)) x x^T / r^2, i.e. v_rr + v_r/r + a(r) v_phiphi / r^2."""
        n = complex(n)

        def A(x):
            x = np.asarray(x, dtype=float)
            r = float(np.hypot(*x))
            a = float(profile(r))
            if r <= match_radius or a == 1.0:
                return np.eye(2, dtype=complex) if a == 1.0 else a * np.eye(2, dtype=complex)
            e = x / r
            return (a * np.eye(2) + (1.0 - a) * np.outer(e, e)).astype(complex)

        return cls(2, A, lambda x: n, "radialPolar", domain,
                   {"match_radius": match_radius, "n": n})

    @property
    def is_constant(self) -> bool:
        return self.source == "constant"


def eval_field(field_: CoefficientField, point) -> tuple[np.ndarray, complex]:
    """Evaluate (A(point), n(point)) with the symmetry of A enforced."""
    p = np.asarray(point, dtype=float)
    if p.shape != (field_.dimension,):
        raise DomainError(f"point {point} has wrong dimension")
    if field_.domain is not None and not field_.domain.contains(p):
        raise DomainError(f"point {tuple(p)} lies outside the domain closure")
    A = np.asarray(field_.A(p), dtype=complex)
    upper = np.triu(A)
    A = upper + np.triu(A, 1).T
    return A, complex(field_.n(p))


@dataclass(frozen=True)
class SampleGrid:
    interior: np.ndarray
    boundary_params: list
    directions: np.ndarray

    def __post_init__(self):
        if len(self.interior) == 0 or len(self.boundary_params) == 0 or len(self.directions) == 0:
            raise ValueError("sample grid lists must be nonempty")

    def frames(self, geometry: DomainGeometry) -> list[BoundaryFrame]:
        return [geometry.frame(p) for p in self.boundary_params]


def directions(dimension: int, count: int) -> np.ndarray:
    """Unit directions: half-circle angles (d=2) or a Fibonacci sphere (d=3)."""
    if dimension == 2:
        th = np.pi * np.arange(count) / count
        return np.column_stack([np.cos(th), np.sin(th)])
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    rho = np.sqrt(1.0 - z * z)
    golden = np.pi * (3.0 - math.sqrt(5.0))
    ang = golden * np.arange(count)
    return np.column_stack([rho * np.cos(ang), rho * np.sin(ang), z])


Resolution = Union[int, tuple[int, int, int]]


def sample(geometry: DomainGeometry, resolution: Resolution = 16, *,
           boundary: int | None = None, n_directions: int | None = None) -> SampleGrid:
    """Deterministic sampling of the closure, boundary and direction sphere.

    ``resolution`` is the interior points per axis; the boundary count defaults
    to 4*resolution (2D) or resolution per face axis (cube) and the direction
    count to resolution (2D) or 4*resolution (3D).
    """
    if isinstance(resolution, tuple):
        resolution, boundary, n_directions = resolution
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    d = geometry.dimension
    if boundary is None:
        boundary = resolution if d == 3 else 4 * resolution
    if n_directions is None:
        n_directions = resolution if d == 2 else 4 * resolution
    if boundary < 1 or n_directions < 1:
        raise ValueError("boundary and direction counts must be positive")

    lo, hi = geometry.bounding_box()
    axes = [np.linspace(lo[j], hi[j], resolution) for j in range(d)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    pts = [p for p in mesh if geometry.contains(p)]
    params = geometry.boundary_params(boundary)
    if d == 2:
        # the closure includes the curve; tensor grids rarely land on it
        pts.extend(geometry.frame(t).point for t in geometry.boundary_params(4 * resolution))
    interior = np.array(pts, dtype=float)
    return SampleGrid(interior, params, directions(d, n_directions))
