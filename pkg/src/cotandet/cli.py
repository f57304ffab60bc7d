"""Command-line interface.

Every pipeline is a subcommand writing machine-readable output (JSON by
default, CSV for grid and vector data) to stdout or --out. Exit codes:
0 success, 1 validation failure or runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import mesh, metric, symmetry, variation
from .laplacian import SpectrumError, assemble, spectrum
from .mesh import MeshFormatError, MeshValidationError, component_count
from .metric import InvalidMetricError, MetricFormatError
from .symmetry import PatternMatrix, SingularPatternError
from .variation import RankChangeError

MESH_CHOICES = mesh.CANONICAL_NAMES + ("triangular_bipyramid",)

UNIFORM_WEIGHT = 2.0 / math.sqrt(3.0)  # cotan weight of any equilateral metric


def _fmt(value) -> str:
    """17 significant digits: enough to round-trip any double."""
    return f"{float(value):.17g}"


def _json_text(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{key}": {_json_text(val, indent + 1)}' for key, val in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{_json_text(val, indent + 1)}" for val in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@contextmanager
def _output(args):
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            yield fh
    else:
        yield sys.stdout


def _emit_json(args, obj) -> None:
    with _output(args) as fh:
        fh.write(_json_text(obj) + "\n")


def _load_triangulation(args) -> mesh.Triangulation:
    if args.canonical:
        if args.canonical == "triangular_bipyramid":
            return mesh.triangular_bipyramid()
        return mesh.build_canonical(args.canonical)
    return mesh.load(args.mesh)


def _load_metric(args, t: mesh.Triangulation) -> metric.DiscreteMetric:
    if args.metric is not None:
        return metric.load_metric(t, args.metric)
    return metric.uniform_metric(t, args.uniform)


def _add_mesh_source(parser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--canonical", choices=MESH_CHOICES, help="built-in triangulation")
    group.add_argument("--mesh", metavar="PATH", help="triangulation file")


def _add_metric_source(parser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--uniform", type=float, default=1.0, metavar="L0",
                       help="uniform edge length")
    group.add_argument("--metric", metavar="PATH", help="metric file")


def _add_output(parser, default_format: str = "json") -> None:
    parser.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default=default_format,
                        help="output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cotandet",
        description="Spectral geometry of discrete metrics on triangulated closed surfaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("validate", help="closed-surface and connectivity report",
                       formatter_class=fmt)
    _add_mesh_source(p)
    _add_output(p)

    p = sub.add_parser("curvature", help="discrete Gaussian curvature per vertex",
                       formatter_class=fmt)
    _add_mesh_source(p)
    _add_metric_source(p)
    p.add_argument("--convention", choices=metric.CONVENTIONS, default="paper",
                   help="angle-defect constant: pi (paper) or 2*pi (standard)")
    _add_output(p)

    for name, help_text in (("spectrum", "eigenvalues and log pseudo-determinant"),
                            ("detlog", "log pseudo-determinant only")):
        p = sub.add_parser(name, help=help_text, formatter_class=fmt)
        _add_mesh_source(p)
        _add_metric_source(p)
        p.add_argument("--kind", choices=("cotan", "normalized"), default="cotan")
        _add_output(p)

    p = sub.add_parser("symmetry", help="distance-class symmetry classification",
                       formatter_class=fmt)
    _add_mesh_source(p)
    _add_output(p)

    p = sub.add_parser("inverse-structure",
                       help="distance-class structure of (L0 + delta)^-1 at the uniform metric",
                       formatter_class=fmt)
    _add_mesh_source(p)
    p.add_argument("--delta", type=float, default=0.5, help="diagonal shift")
    p.add_argument("--tol", type=float, default=1e-10, help="per-class spread tolerance")
    _add_output(p)

    p = sub.add_parser("stationarity", help="first-derivative probe of log det'",
                       formatter_class=fmt)
    _add_mesh_source(p)
    _add_metric_source(p)
    p.add_argument("--kind", choices=("cotan", "normalized"), default="cotan")
    p.add_argument("--h", type=float, default=variation.DEFAULT_GRADIENT_STEP,
                   help="finite-difference step")
    p.add_argument("--tol", type=float, default=variation.DEFAULT_STATIONARITY_TOL,
                   help="max-norm gradient tolerance")
    _add_output(p)

    p = sub.add_parser("hessian", help="second derivative of log det' "
                       "(normalized kind restricts to area-preserving directions)",
                       formatter_class=fmt)
    _add_mesh_source(p)
    _add_metric_source(p)
    p.add_argument("--kind", choices=("cotan", "normalized"), default="cotan")
    p.add_argument("--h", type=float, default=variation.DEFAULT_HESSIAN_STEP,
                   help="finite-difference step")
    _add_output(p)

    p = sub.add_parser("sweep", help="log det' over a two-edge length grid (CSV)",
                       formatter_class=fmt)
    _add_mesh_source(p)
    _add_metric_source(p)
    p.add_argument("--kind", choices=("cotan", "normalized"), default="cotan")
    p.add_argument("--edges", required=True, metavar="A0,A1,B0,B1",
                   help="the two edges to vary, as four vertex indices")
    p.add_argument("--range", dest="bounds", default="0.8,1.2", metavar="LO,HI",
                   help="length range for both edges")
    p.add_argument("--steps", type=int, default=41, help="grid resolution per axis")
    _add_output(p, default_format="csv")

    return parser


def _positive(parser, args, names) -> None:
    for name in names:
        value = getattr(args, name, None)
        if value is not None and not value > 0.0:
            parser.error(f"--{name} must be positive, got {value}")


def cmd_validate(args) -> int:
    t = _load_triangulation(args)
    report = mesh.validate_closed(t)
    _emit_json(args, {
        "is_closed": report.is_closed,
        "is_connected": report.is_connected,
        "euler_characteristic": report.euler_characteristic,
        "vertices": t.vertex_count,
        "edges": len(t.edges),
        "triangles": len(t.triangles),
        "offending_edges": [list(e) for e in report.offending_edges],
    })
    return 0 if report.is_closed and report.is_connected else 1


def cmd_curvature(args) -> int:
    t = _load_triangulation(args)
    m = _load_metric(args, t)
    curv = metric.gaussian_curvature(t, m, args.convention)
    if args.format == "csv":
        with _output(args) as fh:
            fh.write("vertex,value\n")
            for i, value in enumerate(curv.values):
                fh.write(f"{i},{_fmt(value)}\n")
    else:
        _emit_json(args, {
            "convention": curv.convention,
            "curvatures": list(curv.values),
            "sum": float(np.sum(curv.values)),
        })
    return 0


def cmd_spectrum(args) -> int:
    t = _load_triangulation(args)
    m = _load_metric(args, t)
    result = spectrum(assemble(t, m, args.kind), expected_kernel_dim=component_count(t))
    if args.format == "csv":
        with _output(args) as fh:
            fh.write("index,eigenvalue\n")
            for i, ev in enumerate(result.eigenvalues):
                fh.write(f"{i},{_fmt(ev)}\n")
    else:
        _emit_json(args, {
            "kind": args.kind,
            "eigenvalues": list(result.eigenvalues),
            "kernel_dim": result.kernel_dim,
            "log_pseudo_det": result.log_pseudo_det,
            "pseudo_det": result.pseudo_det if math.isfinite(result.pseudo_det) else None,
        })
    return 0


def cmd_detlog(args) -> int:
    t = _load_triangulation(args)
    m = _load_metric(args, t)
    result = spectrum(assemble(t, m, args.kind), expected_kernel_dim=component_count(t))
    _emit_json(args, {"kind": args.kind, "kernel_dim": result.kernel_dim,
                      "log_pseudo_det": result.log_pseudo_det})
    return 0


def cmd_symmetry(args) -> int:
    t = _load_triangulation(args)
    profile = symmetry.symmetry_profile(t)
    alpha = {str(ell): {str(s): c for (l2, s), c in sorted(profile.alpha_table.items())
                        if l2 == ell}
             for ell in sorted({l2 for (l2, _) in profile.alpha_table})}
    witness = None
    if profile.witness is not None:
        pair_a, pair_b, s, count_a, count_b = profile.witness
        witness = {"pair_a": list(pair_a), "pair_b": list(pair_b), "s": s,
                   "alpha_a": count_a, "alpha_b": count_b}
    _emit_json(args, {
        "diameter": profile.diameter,
        "degree": profile.degree if profile.is_strongly_symmetric else None,
        "alpha_table": alpha,
        "is_strongly_symmetric": profile.is_strongly_symmetric,
        "witness": witness,
    })
    return 0


def cmd_inverse_structure(args) -> int:
    t = _load_triangulation(args)
    degrees = sorted({t.degree(i) for i in range(t.vertex_count)})
    x = degrees[-1] * UNIFORM_WEIGHT + args.delta
    y = -UNIFORM_WEIGHT
    pattern = PatternMatrix(t, x, y)
    check = symmetry.verify_distance_constant_inverse(t, pattern, tol=args.tol)
    profile = symmetry.symmetry_profile(t)
    recursion = None
    agreement = None
    if profile.is_strongly_symmetric:
        structured = symmetry.recursion_inverse(profile, x, y)
        recursion = {
            "values_by_distance": list(structured.values),
            "valid": structured.valid,
            "max_residual": structured.max_residual,
        }
        agreement = max(abs(structured.values[ell] - check.class_means[ell])
                        for ell in range(profile.diameter + 1))
    payload = {
        "pattern": {"x": x, "y": y, "delta": args.delta},
        "distance_constant": {
            "is_constant": check.is_constant,
            "spreads": {str(ell): s for ell, s in sorted(check.spreads.items())},
            "class_means": {str(ell): v for ell, v in sorted(check.class_means.items())},
        },
        "recursion": recursion,
        "max_abs_disagreement": agreement,
    }
    if mesh.is_complete(t):
        c_diag, c_off = symmetry.complete_pattern_inverse(t.vertex_count, x, y)
        payload["closed_form"] = {"c_diag": c_diag, "c_off": c_off}
    _emit_json(args, payload)
    return 0


def cmd_stationarity(args) -> int:
    t = _load_triangulation(args)
    m = _load_metric(args, t)
    report = variation.check_stationarity(t, m, kind=args.kind, h=args.h, tol=args.tol)
    _emit_json(args, {
        "kind": report.kind,
        "h": report.h,
        "tol": report.tol,
        "directions": [
            {"label": label, "fd_derivative": fd, "trace_derivative": tr,
             "difference": fd - tr}
            for label, fd, tr in zip(report.labels, report.fd_derivatives,
                                     report.trace_derivatives)
        ],
        "max_abs_derivative": report.max_abs_derivative,
        "passed": report.passed,
    })
    return 0 if report.passed else 1


def cmd_hessian(args) -> int:
    t = _load_triangulation(args)
    m = _load_metric(args, t)
    constrained = args.kind == "normalized"
    hess = variation.fd_hessian(t, m, kind=args.kind, h=args.h, constrained=constrained)
    eigenvalues = np.linalg.eigvalsh(hess)
    _emit_json(args, {
        "kind": args.kind,
        "h": args.h,
        "constrained": constrained,
        "directions": hess.shape[0],
        "eigenvalues": list(eigenvalues),
        "matrix": [list(row) for row in hess],
    })
    return 0


def cmd_sweep(args) -> int:
    if args.format != "csv":
        raise UsageError("sweep emits grid data; only --format csv is supported")
    t = _load_triangulation(args)
    m = _load_metric(args, t)
    try:
        a0, a1, b0, b1 = (int(v) for v in args.edges.split(","))
        lo, hi = (float(v) for v in args.bounds.split(","))
    except ValueError:
        raise UsageError(f"could not parse --edges {args.edges!r} / --range {args.bounds!r}")
    grid = variation.sweep_two_edges(t, m, (a0, a1), (b0, b1), (lo, hi), args.steps,
                                     kind=args.kind)
    with _output(args) as fh:
        grid.write_csv(fh)
    return 0


class UsageError(Exception):
    pass


COMMANDS = {
    "validate": cmd_validate,
    "curvature": cmd_curvature,
    "spectrum": cmd_spectrum,
    "detlog": cmd_detlog,
    "symmetry": cmd_symmetry,
    "inverse-structure": cmd_inverse_structure,
    "stationarity": cmd_stationarity,
    "hessian": cmd_hessian,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _positive(parser, args, ("uniform", "h", "tol", "delta", "steps"))
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))  # exits 2
    except (MeshFormatError, MeshValidationError, InvalidMetricError, MetricFormatError,
            SpectrumError, SingularPatternError, RankChangeError, ValueError, OSError) as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
