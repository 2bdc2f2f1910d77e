"""JSON problem configurations.

Top-level keys:

``geometry``
    ``{"kind": "disk", "radius": R}``, ``{"kind": "annulus", "r_in": a, "r_out": b}``,
    ``{"kind": "cube", "side": L}`` or
    ``{"kind": "parametrized2d", "x": expr, "y": expr, "dx": expr, "dy": expr}``
    (expressions in ``t``; ``dx``/``dy`` are the exact derivatives).
``coefficients``
    ``A``: upper-triangle table ``{"a11": ..., "a12": ..., ...}`` of expressions
    (in x1, x2, x3, r) or ``"identity"``; alternatively ``family: "ramped_disk"``
    with ``a1`` and optional ``match_radius``. ``n``: expression (default 1).
    ``c``: constant expression scaling n (default 1). ``dimension`` is
    optional and must agree with the geometry.
``analysis``
    Optional knobs, see ``ANALYSIS_DEFAULTS``.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..fields import Annulus, CoefficientField, Cube, Curve2D, Disk, DomainGeometry
from .expr import Expression, ExpressionError

ANALYSIS_DEFAULTS = {
    "resolution": 16,
    "boundary_resolution": 360,
    "direction_resolution": 16,
    "tau_resolution": 720,
    "tolerance": 1e-8,
    "phi_grid": 360,
    "rect": [0.5, 8.0, -0.5, 0.5],
    "contour_resolution": 256,
    "modes": [0, 1],
    "c_values": None,
    "epsilon": 1e-3,
    "min_gap_deg": 5.0,
}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _expr(value, path: str, variables=("x1", "x2", "x3", "r")) -> Expression:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigError(path, "expected a number or expression string")
    try:
        return Expression.compile(value, variables)
    except ExpressionError as exc:
        raise ConfigError(path, str(exc)) from None


def _positive(obj: dict, key: str, path: str) -> float:
    if key not in obj:
        raise ConfigError(f"{path}.{key}", "required")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
        raise ConfigError(f"{path}.{key}", "must be a positive number")
    return float(v)


def _check_keys(obj, allowed, path):
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ConfigError(f"{path}.{extra[0]}", "unknown key")


@dataclass
class ProblemSpec:
    geometry: dict
    coefficients: dict
    analysis: dict
    dimension: int
    source: str | None = None
    _geometry_obj: DomainGeometry | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {"geometry": copy.deepcopy(self.geometry),
                "coefficients": copy.deepcopy(self.coefficients),
                "analysis": copy.deepcopy(self.analysis)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @property
    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]

    def build_geometry(self) -> DomainGeometry:
        if self._geometry_obj is None:
            self._geometry_obj = _build_geometry(self.geometry)
        return self._geometry_obj

    @property
    def c_scale(self) -> complex:
        return _expr(self.coefficients.get("c", 1), "coefficients.c")()

    def build_field(self) -> CoefficientField:
        geom = self.build_geometry()
        co = self.coefficients
        c = self.c_scale
        n_expr = _expr(co.get("n", 1), "coefficients.n")
        d = self.dimension

        def n_fn(x):
            return c * n_expr(**_bindings(x))

        if co.get("family") == "ramped_disk":
            from ..spectra.radial import ramp_profile

            prof = ramp_profile(float(co["a1"]), float(co.get("match_radius", 0.5)),
                                    radius=float(self.geometry["radius"]))
            base = CoefficientField.radial_polar(prof, 1.0, geom, float(co.get("match_radius", 0.5)))
            if n_expr.is_constant:
                nval = c * n_expr()
                return CoefficientField(2, base.A, lambda x: nval, "radialPolar", geom,
                                        {"family": "ramped_disk"})
            return CoefficientField(2, base.A, n_fn, "radialPolar", geom, {"family": "ramped_disk"})

        entries = _A_table(co.get("A", "identity"), d)
        if all(e.is_constant for e in entries.values()) and n_expr.is_constant:
            A = np.zeros((d, d), dtype=complex)
            for (i, j), e in entries.items():
                A[i, j] = A[j, i] = e()
            return CoefficientField.constant(A, c * n_expr(), geom)

        def A_fn(x):
            b = _bindings(x)
            A = np.zeros((d, d), dtype=complex)
            for (i, j), e in entries.items():
                A[i, j] = A[j, i] = e(**b)
            return A

        return CoefficientField(d, A_fn, n_fn, "expression", geom, {})

    def radial_problem(self, mode: int = 0):
        """RadialProblem for spectrum computations (disk only)."""
        from ..spectra.radial import RadialProblem, ramp_profile

        if self.geometry.get("kind") != "disk":
            raise ConfigError("geometry.kind", "spectrum needs a disk geometry")
        co = self.coefficients
        R = float(self.geometry["radius"])
        n_expr = _expr(co.get("n", 1), "coefficients.n")
        if not n_expr.is_constant:
            raise ConfigError("coefficients.n", "spectrum needs a constant n")
        n0 = n_expr()
        if co.get("family") == "ramped_disk":
            mr = float(co.get("match_radius", 0.5))
            return RadialProblem(R, ramp_profile(float(co["a1"]), mr, R), self.c_scale, mode,
                                 mr, 1.0, n0, "ramped_disk")
        entries = _A_table(co.get("A", "identity"), 2)
        if not all(e.is_constant for e in entries.values()):
            raise ConfigError("coefficients.A", "spectrum needs A = alpha*I or the ramped_disk family")
        a11, a12, a22 = entries[(0, 0)](), entries[(0, 1)](), entries[(1, 1)]()
        if a12 != 0 or a11 != a22 or a11.imag != 0 or a11.real <= 0:
            raise ConfigError("coefficients.A", "spectrum needs A = alpha*I with alpha > 0")
        return RadialProblem(R, None, self.c_scale, mode, min(0.5, R / 2), a11.real, n0, "isotropic")


def _bindings(x) -> dict:
    x = np.asarray(x, dtype=float)
    b = {f"x{j + 1}": float(x[j]) for j in range(x.shape[0])}
    b.setdefault("x3", 0.0)
    b["r"] = float(np.linalg.norm(x))
    return b


def _A_table(spec, d: int) -> dict:
    path = "coefficients.A"
    if spec == "identity":
        return {(i, j): Expression.compile(1.0 if i == j else 0.0)
                for i in range(d) for j in range(i, d)}
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected 'identity' or an entry table")
    valid = {f"a{i + 1}{j + 1}": (i, j) for i in range(d) for j in range(d)}
    out = {}
    for key, value in spec.items():
        if key not in valid:
            raise ConfigError(f"{path}.{key}", f"not an entry of a {d}x{d} matrix")
        i, j = valid[key]
        if i > j:
            raise ConfigError(f"{path}.{key}", "only the upper triangle is accepted (mirrored automatically)")
        out[(i, j)] = _expr(value, f"{path}.{key}")
    for i in range(d):
        if (i, i) not in out:
            raise ConfigError(f"{path}.a{i + 1}{i + 1}", "required")
        for j in range(i + 1, d):
            out.setdefault((i, j), Expression.compile(0.0))
    return out


def _build_geometry(g: dict) -> DomainGeometry:
    kind = g.get("kind")
    if kind == "disk":
        return Disk(_positive(g, "radius", "geometry"))
    if kind == "annulus":
        a, b = _positive(g, "r_in", "geometry"), _positive(g, "r_out", "geometry")
        if not a < b:
            raise ConfigError("geometry.r_in", "must be smaller than r_out")
        return Annulus(a, b)
    if kind == "cube":
        return Cube(_positive(g, "side", "geometry"))
    if kind == "parametrized2d":
        ex = {k: _expr(g.get(k), f"geometry.{k}", ("t",)) for k in ("x", "y", "dx", "dy")}

        def curve(t):
            return (ex["x"](t=t).real, ex["y"](t=t).real)

        def deriv(t):
            return (ex["dx"](t=t).real, ex["dy"](t=t).real)

        geom = Curve2D(curve, deriv, g.get("label", "parametrized2d"))
        for t in geom.boundary_params(64):
            try:
                geom.frame(t)
            except ValueError as exc:
                raise ConfigError("geometry.dx", str(exc)) from None
        return geom
    raise ConfigError("geometry.kind", f"unknown geometry {kind!r}")


_GEOMETRY_KEYS = {
    "disk": ("kind", "radius"),
    "annulus": ("kind", "r_in", "r_out"),
    "cube": ("kind", "side"),
    "parametrized2d": ("kind", "x", "y", "dx", "dy", "label"),
}


def _validate_analysis(a: dict) -> dict:
    _check_keys(a, ANALYSIS_DEFAULTS, "analysis")
    out = copy.deepcopy(ANALYSIS_DEFAULTS)
    out.update(copy.deepcopy(a))
    for key, lo in (("resolution", 2), ("boundary_resolution", 1), ("direction_resolution", 1),
                    ("tau_resolution", 360), ("phi_grid", 1), ("contour_resolution", 4)):
        v = out[key]
        if isinstance(v, bool) or not isinstance(v, int) or v < lo:
            raise ConfigError(f"analysis.{key}", f"must be an integer >= {lo}")
    for key in ("tolerance", "epsilon", "min_gap_deg"):
        v = out[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError(f"analysis.{key}", "must be a positive number")
        out[key] = float(v)
    rect = out["rect"]
    if (not isinstance(rect, list) or len(rect) != 4
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in rect)
            or not (rect[0] < rect[1] and rect[2] < rect[3])):
        raise ConfigError("analysis.rect", "must be [x0, x1, y0, y1] with x0 < x1 and y0 < y1")
    out["rect"] = [float(v) for v in rect]
    modes = out["modes"]
    if not isinstance(modes, list) or not modes or not all(
            isinstance(m, int) and not isinstance(m, bool) and m >= 0 for m in modes):
        raise ConfigError("analysis.modes", "must be a nonempty list of nonnegative integers")
    if out["c_values"] is not None:
        cv = out["c_values"]
        if not isinstance(cv, list) or not cv:
            raise ConfigError("analysis.c_values", "must be a nonempty list")
        for j, c in enumerate(cv):
            e = _expr(c, f"analysis.c_values[{j}]", ())
            e()
    return out


def validate(data) -> ProblemSpec:
    _check_keys(data, ("geometry", "coefficients", "analysis"), "$")
    for key in ("geometry", "coefficients"):
        if key not in data:
            raise ConfigError(key, "required")
    g = data["geometry"]
    if not isinstance(g, dict) or "kind" not in g:
        raise ConfigError("geometry.kind", "required")
    if g["kind"] not in _GEOMETRY_KEYS:
        raise ConfigError("geometry.kind", f"unknown geometry {g['kind']!r}")
    _check_keys(g, _GEOMETRY_KEYS[g["kind"]], "geometry")
    geometry = copy.deepcopy(g)
    geom_obj = _build_geometry(geometry)
    d = geom_obj.dimension

    co = data["coefficients"]
    _check_keys(co, ("dimension", "A", "n", "c", "family", "a1", "match_radius"), "coefficients")
    coefficients = copy.deepcopy(co)
    if "dimension" in co:
        if co["dimension"] not in (2, 3) or isinstance(co["dimension"], bool):
            raise ConfigError("coefficients.dimension", "must be 2 or 3")
        if co["dimension"] != d:
            raise ConfigError("coefficients.dimension",
                              f"dimension {co['dimension']} inconsistent with {g['kind']} geometry (d={d})")
    coefficients["dimension"] = d
    family = co.get("family")
    if family is not None:
        if family != "ramped_disk":
            raise ConfigError("coefficients.family", f"unknown family {family!r}")
        if g["kind"] != "disk":
            raise ConfigError("coefficients.family", "ramped_disk needs a disk geometry")
        if "A" in co:
            raise ConfigError("coefficients.A", "give either A or family, not both")
        a1 = _positive(co, "a1", "coefficients")
        mr = float(co.get("match_radius", 0.5))
        if not 0 < mr < geometry["radius"]:
            raise ConfigError("coefficients.match_radius", "must lie in (0, radius)")
        coefficients["match_radius"] = mr
        coefficients["a1"] = a1
    else:
        for key in ("a1", "match_radius"):
            if key in co:
                raise ConfigError(f"coefficients.{key}", "only valid with family ramped_disk")
        A = co.get("A", "identity")
        table = _A_table(A, d)
        if isinstance(A, dict):
            # echo the mirrored, completed upper triangle
            coefficients["A"] = {f"a{i + 1}{j + 1}": e.text for (i, j), e in sorted(table.items())}
        else:
            coefficients["A"] = A
    coefficients["n"] = _expr(co.get("n", 1), "coefficients.n").text
    c_expr = _expr(co.get("c", 1), "coefficients.c", ())
    c_expr()
    coefficients["c"] = c_expr.text

    analysis = _validate_analysis(data.get("analysis", {}))
    return ProblemSpec(geometry, coefficients, analysis, d, None, geom_obj)


def load_spec(path) -> ProblemSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("$", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from None
    spec = validate(data)
    spec.source = str(path)
    return spec
