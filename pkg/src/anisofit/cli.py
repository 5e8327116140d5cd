"""Command-line entry point.

Exit status: 0 success, 1 numeric failure, 2 bad arguments, 3 file errors.
"""
from __future__ import annotations

import argparse
import math
import sys
from typing import List, Optional

import numpy as np

from . import analysis, codec, meshio, shape
from .refine import DECISION_NORMS, SAFETY_KINDS, STRATEGIES, RefineConfig, run_to_N
from .targets import builtin, builtin_names, raster_target

EXIT_NUMERIC, EXIT_USAGE, EXIT_FILE = 1, 2, 3


class UsageError(Exception):
    pass


def _floats(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _p(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"p must be a number or inf, got {text!r}") from None
    if not v >= 1:
        raise argparse.ArgumentTypeError("p must lie in [1, inf]")
    return v


def parse_target(spec: str):
    """``name`` or ``name:p1,p2`` for builtins; ``pgm:path`` for rasters."""
    name, _, params = spec.partition(":")
    if name == "pgm":
        if not params:
            raise UsageError("pgm target needs a path: pgm:file.pgm")
        return raster_target(meshio.read_pgm(params))
    if name not in builtin_names():
        raise UsageError(f"unknown target {name!r}; known: {', '.join(builtin_names())}, pgm:PATH")
    try:
        return builtin(name, _floats(params) if params else ())
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(str(exc)) from None


def _add_run_args(sp, default_N=256):
    g = sp.add_argument_group("refinement")
    g.add_argument("--target", required=True, help="builtin[:params] or pgm:PATH")
    g.add_argument("--strategy", choices=STRATEGIES, required=True)
    g.add_argument("--p", type=_p, default=2.0, help="norm exponent (number or inf)")
    g.add_argument("--m", type=int, default=None, help="degree m (polynomials of degree m-1); default 1 in 1D "
                                                          "and on rectangles, 2 on triangles")
    g.add_argument("--N", type=int, default=default_N, help="target leaf count")
    g.add_argument("--rho", type=float, default=1 / math.sqrt(2))
    g.add_argument("--decision-norm", choices=DECISION_NORMS, default="lp")
    g.add_argument("--safety", choices=SAFETY_KINDS, default="longest_edge")
    g.add_argument("--samples", type=int, default=33, help="sample lattice size for sup norms")


def _config(args, max_N: Optional[int] = None) -> RefineConfig:
    m = args.m
    if m is None:
        m = 2 if args.strategy.startswith(("aniso_tri", "iso_newest", "iso_longest")) else 1
    try:
        return RefineConfig(degree=m, p=args.p, strategy=args.strategy, decision_norm=args.decision_norm,
                            rho=args.rho, safety_kind=args.safety, samples=args.samples,
                            max_N=max_N if max_N is not None else args.N)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write(path: Optional[str], text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="anisofit", description="Greedy adaptive and anisotropic refinement.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("refine", help="run greedy refinement and write a mesh document")
    _add_run_args(sp)
    sp.add_argument("--out", default="-", help="mesh document path (default stdout)")
    sp.add_argument("--svg", default=None, help="also render the mesh to this SVG file")

    sp = sub.add_parser("convergence", help="error against N as CSV")
    _add_run_args(sp)
    sp.add_argument("--schedule", type=_ints, required=True, help="increasing N values, e.g. 64,128,256")
    sp.add_argument("--uniform", action="store_true", help="1D only: uniform partitions instead of greedy")
    sp.add_argument("--out", default="-")

    sp = sub.add_parser("table", help="theoretical and empirical constants for the sharp ring")
    sp.add_argument("--deltas", type=_floats, default=[0.2, 0.1, 0.05])
    sp.add_argument("--N", type=int, default=analysis.TABLE_N)
    sp.add_argument("--cells", type=int, default=400, help="quadrature cells per axis for U, I, A")
    sp.add_argument("--out", default="-")

    sp = sub.add_parser("shape", help="evaluate shape functions of a form")
    kind = sp.add_mutually_exclusive_group(required=True)
    kind.add_argument("--krect", action="store_true", help="K_p for q = qx x + qy y (--q qx,qy)")
    kind.add_argument("--optimal-rect", action="store_true", help="optimal rectangle of given --area")
    kind.add_argument("--k2", action="store_true", help="K_{2,p} for a x^2 + 2 b x y + c y^2 (--q a,b,c)")
    kind.add_argument("--k3", action="store_true", help="K_{3,p} for a x^3 + b x^2 y + c x y^2 + d y^3")
    sp.add_argument("--p", type=_p, default=2.0)
    sp.add_argument("--q", type=_floats, required=True, help="form coefficients")
    sp.add_argument("--area", type=float, default=1.0)
    sp.add_argument("--kappa-file", default=None, help="constants file (default: packaged)")

    sp = sub.add_parser("render", help="mesh document to SVG")
    sp.add_argument("mesh")
    sp.add_argument("--out", default="-")
    sp.add_argument("--coloring", choices=("none", "value", "sigma_threshold"), default="none")
    sp.add_argument("--Q", type=_floats, default=None, help="a,b,c of the form for sigma_threshold")
    sp.add_argument("--threshold", type=float, default=2.0)
    sp.add_argument("--sigma-p", type=_p, default=2.0)

    sp = sub.add_parser("encode", help="run refinement and write the tree bitstream")
    _add_run_args(sp)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("decode", help="tree bitstream to a geometry-only mesh document")
    sp.add_argument("bits")
    sp.add_argument("--out", default="-")
    return ap


def _cmd_refine(args):
    f = parse_target(args.target)
    tree, _ = run_to_N(f, _config(args))
    doc = meshio.mesh_from_tree(tree, args.target)
    _write(args.out, meshio.format_mesh(doc))
    if args.svg:
        _write(args.svg, meshio.write_svg(doc, "value" if f.image is not None else "none"))


def _cmd_convergence(args):
    f = parse_target(args.target)
    sched = args.schedule
    if any(b <= a for a, b in zip(sched, sched[1:])) or not sched:
        raise UsageError("--schedule must be increasing")
    cfg = _config(args, max_N=sched[-1])
    if args.uniform:
        if f.dim != 1:
            raise UsageError("--uniform is only available for 1D targets")
        recs = analysis.uniform_1d_run(f, sched, cfg.degree, cfg.p, cfg.samples)
    else:
        recs = analysis.convergence_run(f, cfg, sched)
    _write(args.out, analysis.records_csv(recs))


def _cmd_table(args):
    rows = analysis.constants_table(args.deltas, N=args.N, cells=args.cells)
    _write(args.out, analysis.constants_csv(rows))


def _need(q, n, what):
    if len(q) != n:
        raise UsageError(f"{what} needs {n} coefficients, got {len(q)}")


def _cmd_shape(args):
    q = args.q
    kappa = shape.load_kappa(args.kappa_file) if args.kappa_file else None
    if args.krect:
        _need(q, 2, "--krect")
        value = shape.K_rect(args.p, shape.LinearForm2(*q))
        _write("-", f"{value!r}\n")
    elif args.optimal_rect:
        _need(q, 2, "--optimal-rect")
        r = shape.optimal_rect(shape.LinearForm2(*q), args.area)
        _write("-", f"{r.width!r} {r.height!r}\n")
    elif args.k2:
        _need(q, 3, "--k2")
        _write("-", f"{shape.K2(args.p, shape.QuadForm2(*q), kappa)!r}\n")
    else:
        _need(q, 4, "--k3")
        _write("-", f"{shape.K3(args.p, shape.CubicForm2(*q), kappa)!r}\n")


def _cmd_render(args):
    doc = meshio.read_mesh(args.mesh)
    Q = None
    if args.coloring == "sigma_threshold":
        if args.Q is None:
            raise UsageError("sigma_threshold coloring needs --Q a,b,c")
        _need(args.Q, 3, "--Q")
        Q = shape.QuadForm2(*args.Q)
    _write(args.out, meshio.write_svg(doc, args.coloring, Q, args.threshold, args.sigma_p))


def _cmd_encode(args):
    f = parse_target(args.target)
    tree, _ = run_to_N(f, _config(args))
    with open(args.out, "wb") as fh:
        fh.write(codec.encode_tree(tree))


def _cmd_decode(args):
    with open(args.bits, "rb") as fh:
        data = fh.read()
    tree = codec.decode_tree(data)
    _write(args.out, meshio.format_mesh(meshio.mesh_from_tree(tree)))


COMMANDS = {
    "refine": _cmd_refine,
    "convergence": _cmd_convergence,
    "table": _cmd_table,
    "shape": _cmd_shape,
    "render": _cmd_render,
    "encode": _cmd_encode,
    "decode": _cmd_decode,
}


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"anisofit {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, meshio.FormatError, codec.BitstreamError) as exc:
        print(f"anisofit {args.command}: {exc}", file=sys.stderr)
        return EXIT_FILE
    except (ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"anisofit {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
