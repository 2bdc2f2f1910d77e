"""Command-line front end.

Exit codes: 0 when the check holds, 2 when it fails, 1 on usage, IO or
configuration errors.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .ellipticity import check_elliptic
from .fields import DomainError, sample
from .ingest import ConfigError, Expression, ExpressionError, load_spec
from .lopatinskii import NonEllipticFieldError, sl_scan
from .parameter import corollary_classify, ray_scan
from .report import Report, fmt, write_csv
from .spectra import (
    ContourConvergenceError, ContourZeroError, DispersionFunction, c_scan, count_zeros, probe_grid,
)
from .spectra.radial import IDENTICALLY_ZERO, RadialProblem, ramp_profile
from .spectra.validate import (
    CubeCase, diag123_cube_field, sample_ks, validate_cube, validate_disk,
)

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _rect(text: str) -> list[float]:
    parts = text.split(",")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError("expected four numbers a,b,c,d") from None
    if len(vals) != 4 or not (vals[0] < vals[1] and vals[2] < vals[3]):
        raise argparse.ArgumentTypeError("expected a,b,c,d with a < b and c < d")
    return vals


def _int_list(text: str) -> list[int]:
    try:
        out = [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers") from None
    if any(m < 0 for m in out):
        raise argparse.ArgumentTypeError("modes must be nonnegative")
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="problem configuration (JSON)")
    common.add_argument("--resolution", type=int, help="interior grid points per axis")
    common.add_argument("--tolerance", type=float, help="margin tolerance")
    common.add_argument("--phi-grid", type=int, help="number of rays in the phi scan")
    common.add_argument("--rect", type=_rect, help="eigenvalue search box a,b,c,d = Re in [a,b], Im in [c,d]")
    common.add_argument("--output", type=Path, help="directory for CSV artifacts")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--timing", action="store_true", help="include wall-clock timings in the report")

    parser = _Parser(prog="itpcheck", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"itpcheck {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("check-ellipticity", parents=[common], help="ellipticity of the matrix field")
    sub.add_parser("check-sl", parents=[common], help="Shapiro-Lopatinskii condition on the boundary")
    sub.add_parser("find-rays", parents=[common], help="rays of parameter-ellipticity")
    sp = sub.add_parser("spectrum", parents=[common], help="disk transmission eigenvalues")
    sp.add_argument("--modes", type=_int_list, help="angular modes, e.g. 0,1")
    sp.add_argument("--c-values", help="comma-separated scalings c of n for a c-scan, e.g. 1,2,1+i")
    sp.add_argument("--dgrid", type=_int_list, default=[64, 16], help="|D_m| grid size nx,ny")
    sub.add_parser("validate-examples", parents=[common], help="reproduce the cube and disk counterexamples")
    return parser


def _spec(args):
    if args.config is None:
        raise UsageError("--config is required for this command")
    spec = load_spec(args.config)
    a = spec.analysis
    if args.resolution is not None:
        if args.resolution < 2:
            raise UsageError("--resolution must be >= 2")
        a["resolution"] = args.resolution
    if args.tolerance is not None:
        if not args.tolerance > 0:
            raise UsageError("--tolerance must be positive")
        a["tolerance"] = args.tolerance
    if args.phi_grid is not None:
        if args.phi_grid < 1:
            raise UsageError("--phi-grid must be >= 1")
        a["phi_grid"] = args.phi_grid
    if args.rect is not None:
        a["rect"] = args.rect
    return spec


def _grid(spec):
    a = spec.analysis
    geom = spec.build_geometry()
    res = a["resolution"]
    if geom.dimension == 2:
        return sample(geom, res, boundary=a["boundary_resolution"], n_directions=a["direction_resolution"])
    return sample(geom, res, n_directions=4 * a["direction_resolution"])


def _param_text(p) -> str:
    if isinstance(p, tuple):
        return ";".join(f"{v:.12g}" for v in p)
    return f"{float(p):.12g}"


def _artifact(args, name, header, rows, config_hash, report):
    if args.output is None:
        return
    path = write_csv(Path(args.output) / name, header, rows, config_hash)
    report.artifacts.append(path.name)


def cmd_check_ellipticity(args) -> Report:
    spec = _spec(args)
    field = spec.build_field()
    rep = check_elliptic(field, _grid(spec), spec.analysis["tolerance"])
    return Report("check-ellipticity", rep.elliptic,
                  {"elliptic": rep.elliptic, "worst_margin": rep.worst_margin,
                   "tolerance": rep.tolerance},
                  spec.to_dict(), spec.config_hash,
                  {"point": list(rep.witness_point),
                   "directions": [list(np.atleast_1d(d)) for d in rep.witness_directions]})


def cmd_check_sl(args) -> Report:
    spec = _spec(args)
    a = spec.analysis
    field = spec.build_field()
    geom = spec.build_geometry()
    try:
        scan = sl_scan(field, geom, grid=_grid(spec), tau_resolution=a["tau_resolution"],
                       tol=a["tolerance"])
    except NonEllipticFieldError as exc:
        r = exc.report
        return Report("check-sl", False, {"elliptic": False, "worst_margin": r.worst_margin},
                      spec.to_dict(), spec.config_hash, {"non_elliptic_point": list(r.witness_point)})
    d = geom.dimension
    failed = [v for v in scan if not v.passed]
    worst = scan.worst
    report = Report(
        "check-sl", scan.passed,
        {"elliptic": True, "frames": len(scan), "failed_frames": len(failed),
         "min_detB_margin": scan.min_margin,
         "max_detB_margin": max(v.detB_margin for v in scan),
         "min_re_a_dd": min(v.re_a_dd for v in scan),
         "max_re_a_dd": max(v.re_a_dd for v in scan),
         "tolerance": a["tolerance"]},
        spec.to_dict(), spec.config_hash,
        {"worst_frame_param": _param_text(worst.frame.param),
         "worst_tau": list(worst.tau_witness) if worst.tau_witness is not None else [],
         "lambda0": worst.lambda0_witness})
    header = (["frame", "param[rad|point]"] + [f"x{j + 1}[length]" for j in range(d)]
              + ["detB_margin[1]", "re_a_dd[1]", "passed", "clause"])
    rows = [[j, _param_text(v.frame.param), *v.frame.point, v.detB_margin, v.re_a_dd, v.passed, v.used_clause]
            for j, v in enumerate(scan)]
    _artifact(args, "sl_frames.csv", header, rows, spec.config_hash, report)
    return report


def cmd_find_rays(args) -> Report:
    spec = _spec(args)
    a = spec.analysis
    field = spec.build_field()
    geom = spec.build_geometry()
    grid = _grid(spec)
    scan = ray_scan(field, geom, a["phi_grid"], grid=grid, tau_resolution=a["tau_resolution"],
                    tol=a["tolerance"])
    verdict = corollary_classify(field, geom, grid, tau_resolution=a["tau_resolution"],
                                 tol=a["tolerance"], epsilon=a["epsilon"],
                                 min_gap=math.radians(a["min_gap_deg"]))
    best = scan.best
    adm = scan.admissible
    summary = {
        "rays": len(scan.reports),
        "admissible_rays": len(adm),
        "best_phi_rad": best.ray.phi,
        "best_margin_I": best.condition_i_margin,
        "best_margin_II": best.condition_ii_margin,
        "corollary_case": verdict.case,
    }
    if verdict.ray is not None:
        summary["corollary_phi_rad"] = verdict.ray.phi
        summary["corollary_margin_I"] = verdict.margins.condition_i_margin
        summary["corollary_margin_II"] = verdict.margins.condition_ii_margin
    if verdict.reason:
        summary["corollary_reason"] = verdict.reason
    mi, mii = best.minimizer_i, best.minimizer_ii
    witnesses = {
        "condition_I": {"x": list(mi.point), "sigma": list(mi.sigma), "rho": mi.rho},
        "condition_II": {"frame_param": _param_text(mii.frame.param), "tau": list(mii.tau), "rho": mii.rho},
    }
    report = Report("find-rays", bool(adm), summary, spec.to_dict(), spec.config_hash, witnesses)
    rows = [[r.ray.phi, r.condition_i_margin, r.condition_ii_margin, r.admissible] for r in scan.reports]
    _artifact(args, "rays.csv", ["phi[rad]", "margin_I[1]", "margin_II[1]", "admissible"], rows,
              spec.config_hash, report)
    return report


def _c_values(args, spec) -> list[complex] | None:
    raw = args.c_values.split(",") if args.c_values else spec.analysis["c_values"]
    if raw is None:
        return None
    out = []
    for j, text in enumerate(raw):
        try:
            out.append(Expression.compile(text.strip() if isinstance(text, str) else text, ())())
        except ExpressionError as exc:
            raise ConfigError(f"c_values[{j}]", str(exc)) from None
    return out


def _dgrid(f, rect, nx, ny):
    xs = np.linspace(rect[0], rect[1], nx)
    ys = np.linspace(rect[2], rect[3], ny)
    ks = (xs[None, :] + 1j * ys[:, None]).ravel()
    return ks, np.abs(f(ks))


def cmd_spectrum(args) -> Report:
    spec = _spec(args)
    a = spec.analysis
    rect = a["rect"]
    modes = args.modes if args.modes is not None else a["modes"]
    if len(args.dgrid) != 2 or min(args.dgrid) < 2:
        raise UsageError("--dgrid needs two integers >= 2")
    nx, ny = args.dgrid
    summary: dict = {"rect": rect, "c": spec.c_scale}
    report = Report("spectrum", True, summary, spec.to_dict(), spec.config_hash)
    zero_rows, grid_rows = [], []
    discrete = True
    for m in modes:
        problem = spec.radial_problem(m)
        f = DispersionFunction(problem)
        pmax = float(np.max(np.abs(f(probe_grid(rect)))))
        entry: dict = {"probe_max_abs_D": pmax}
        if pmax < IDENTICALLY_ZERO:
            entry["status"] = "identically zero"
            discrete = False
        else:
            zc = count_zeros(f, rect, a["contour_resolution"], refine=True)
            entry.update(status="finite", count=zc.count, winding=zc.winding,
                         zeros=[complex(z) for z in zc.refined_zeros])
            zero_rows += [[m, z.real, z.imag, abs(f(np.array([z]))[0])] for z in zc.refined_zeros]
        ks, absD = _dgrid(f, rect, nx, ny)
        grid_rows += [[m, k.real, k.imag, v] for k, v in zip(ks, absD)]
        summary[f"mode_{m}"] = entry
    cvals = _c_values(args, spec)
    if cvals is not None:
        scan_rows = []
        for m in modes:
            base = spec.radial_problem(m)
            results = c_scan(base, cvals, rect, a["contour_resolution"], refine=True)
            summary[f"c_scan_mode_{m}"] = {
                f"c={fmt(r.c)}": ("identically zero" if r.identically_zero else r.count) for r in results}
            scan_rows += [[m, r.c.real, r.c.imag, r.identically_zero, "" if r.count is None else r.count,
                           r.probe_max] for r in results]
        _artifact(args, "c_scan.csv", ["mode", "re_c[1]", "im_c[1]", "identically_zero", "count",
                                       "probe_max_abs_D[1]"], scan_rows, spec.config_hash, report)
    summary["discrete"] = discrete
    _artifact(args, "zeros.csv", ["mode", "re_k[1/length]", "im_k[1/length]", "abs_D[1]"], zero_rows,
              spec.config_hash, report)
    _artifact(args, "dispersion_grid.csv", ["mode", "re_k[1/length]", "im_k[1/length]", "abs_D[1]"],
              grid_rows, spec.config_hash, report)
    return report


def cmd_validate_examples(args) -> Report:
    checks: dict = {}
    ks = sample_ks(20, 5.0)
    cube_res = [validate_cube(CubeCase(complex(k), 1.0, 1.0)) for k in ks]
    cube_max = max(r.max_residual for r in cube_res)
    field = diag123_cube_field()
    cube_sl = sl_scan(field, field.domain, resolution=args.resolution or 8)
    checks["cube_residuals_below_1e-10"] = all(r.passed for r in cube_res)
    checks["cube_sl_passes"] = cube_sl.passed

    disk2 = RadialProblem(a_profile=ramp_profile(2.0), label="ramped a1=2")
    v2 = validate_disk(disk2, ks)
    checks["disk_a1_2_D0_identically_zero"] = v2.identically_zero
    checks["disk_a1_2_sl_passes"] = v2.sl_passed
    d1 = DispersionFunction(disk2.with_(mode=1))
    m1 = count_zeros(d1, (0.5, 8.0, -0.5, 0.5))
    checks["disk_a1_2_mode1_not_identically_zero"] = bool(
        np.max(np.abs(d1(probe_grid((0.5, 8.0, -0.5, 0.5))))) >= IDENTICALLY_ZERO)

    v1 = validate_disk(RadialProblem(a_profile=ramp_profile(1.0), label="ramped a1=1"), ks)
    checks["disk_a1_1_D0_identically_zero"] = v1.identically_zero
    checks["disk_a1_1_sl_fails"] = not v1.sl_passed

    summary = {
        "cube_samples": len(cube_res),
        "cube_max_residual": cube_max,
        "cube_sl_min_margin": cube_sl.min_margin,
        "disk_a1_2_max_abs_D0": v2.max_abs_dispersion,
        "disk_a1_2_sl_min_margin": v2.sl.min_margin if v2.sl else None,
        "disk_a1_2_mode1_count": m1.count,
        "disk_a1_1_max_abs_D0": v1.max_abs_dispersion,
        "disk_a1_1_sl_min_margin": v1.sl.min_margin if v1.sl else None,
        "checks": checks,
    }
    report = Report("validate-examples", all(checks.values()), summary)
    rows = [[r.case.k.real, r.case.k.imag, r.interior_u, r.interior_v, r.dirichlet, r.neumann]
            for r in cube_res]
    _artifact(args, "cube_residuals.csv",
              ["re_k[1/length]", "im_k[1/length]", "res_u[1]", "res_v[1]", "res_dirichlet[1]",
               "res_neumann[1]"], rows, "builtin", report)
    return report


COMMANDS = {
    "check-ellipticity": cmd_check_ellipticity,
    "check-sl": cmd_check_sl,
    "find-rays": cmd_find_rays,
    "spectrum": cmd_spectrum,
    "validate-examples": cmd_validate_examples,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        t0 = time.perf_counter()
        report = COMMANDS[args.command](args)
        if args.timing:
            report.timing = {"wall": time.perf_counter() - t0}
    except UsageError as exc:
        print(f"itpcheck: usage error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ConfigError, ExpressionError, DomainError) as exc:
        print(f"itpcheck: configuration error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ContourZeroError, ContourConvergenceError) as exc:
        print(f"itpcheck: contour error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"itpcheck: io error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    sys.stdout.write(report.to_json() if args.format == "json" else report.to_text())
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
