"""Command-line front end.

Subcommands: build (polytope bundle from an expression or graph), graph,
faces, flags, verify (exact identity suites), experiment (perturbation
runs with CSV/JSON reports).  Exit status is 0 exactly when all requested
checks pass.  Identical command and seed produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import faces as facemod
from . import flags as flagmod
from . import geometry as geom
from . import hanner
from . import witness as witmod
from .linalg import parse_rat, rat_str

VERIFY_MAX_DIM = 6
EXPERIMENT_MAX_DIM = 4


def _load_expr(args):
    if args.expr:
        return hanner.parse_expr(args.expr)
    with open(args.graph) as fh:
        g = hanner.graph_from_json(json.load(fh))
    return hanner.hanner_of_graph(g)


def _vec_json(v):
    return [rat_str(c) for c in v]


def cmd_build(args):
    expr = _load_expr(args)
    g = hanner.graph_of(expr)
    vs = hanner.vertex_vectors(expr)
    ps = hanner.polar_vertex_vectors(expr)
    bundle = {
        "expr": hanner.format_expr(expr),
        "n": hanner.dim(expr),
        "graph": hanner.graph_to_json(g),
        "vertices": [_vec_json(v) for v in vs],
        "polar_vertices": [_vec_json(v) for v in ps],
        "counts": {
            "vertices": len(vs),
            "polar_vertices": len(ps),
            "faces": len(facemod.enumerate_faces(expr)),
            "flags": flagmod.flag_count(expr),
        },
    }
    print(json.dumps(bundle, indent=2, sort_keys=True))
    return 0


def cmd_graph(args):
    expr = _load_expr(args)
    print(json.dumps(hanner.graph_to_json(hanner.graph_of(expr)), sort_keys=True))
    return 0


def cmd_faces(args):
    expr = _load_expr(args)
    n = hanner.dim(expr)
    out = []
    for face in facemod.enumerate_faces(expr):
        out.append({
            "face": facemod.face_to_json(face),
            "dim": facemod.face_dim(expr, face),
            "centroid": _vec_json(facemod.centroid(expr, face, n)),
        })
    print(json.dumps({"expr": hanner.format_expr(expr), "faces": out}, indent=2, sort_keys=True))
    return 0


def cmd_flags(args):
    expr = _load_expr(args)
    flags = flagmod.all_flags(expr)
    sample = [
        [facemod.face_to_json(f) for f in flag.faces]
        for flag in flags[: args.limit]
    ]
    print(json.dumps({
        "expr": hanner.format_expr(expr),
        "count": len(flags),
        "sample": sample,
    }, indent=2, sort_keys=True))
    return 0


def _verify_suites(expr, suite):
    n = hanner.dim(expr)
    results = {}
    if suite in ("abc", "all"):
        report = facemod.verify_frame_conditions(expr)
        results["abc"] = report.ok
    if suite in ("equal-volumes", "all"):
        bases = flagmod.flag_bases(expr)
        vols = {abs(fb.base_det) for fb in bases}
        total = flagmod.volume_function(flagmod.centroid_assignment(expr), expr)
        hvol = geom.volume(witmod.hanner_body(expr))
        from math import factorial

        results["equal-volumes"] = (
            len(vols) == 1
            and flagmod.flag_count(expr) == 2 ** n * factorial(n)
            and total == hvol
        )
    if suite in ("derivative", "all"):
        grad = flagmod.volume_gradient(expr)
        ok = True
        for face, g in grad.items():
            fr = facemod.affine_frame(expr, face)
            from .linalg import dot

            ok = ok and all(dot(g, d) == 0 for d in fr.dirs)
        results["derivative"] = ok
    if suite in ("cl", "all"):
        ok, _ = hanner.check_cl_property(expr)
        g = hanner.graph_of(expr)
        ok = ok and hanner.graph_of(hanner.hanner_of_graph(g)) == g
        results["cl"] = ok
    return results


def cmd_verify(args):
    expr = _load_expr(args)
    n = hanner.dim(expr)
    limit = args.max_dim or VERIFY_MAX_DIM
    if n > limit:
        print(f"refusing dimension {n} > {limit}; raise with --max-dim", file=sys.stderr)
        return 2
    results = _verify_suites(expr, args.suite)
    ok = all(results.values())
    for name in sorted(results):
        print(f"{name}: {'pass' if results[name] else 'FAIL'}")
    return 0 if ok else 1


def cmd_experiment(args):
    expr = _load_expr(args)
    n = hanner.dim(expr)
    limit = args.max_dim or EXPERIMENT_MAX_DIM
    if n > limit:
        print(f"refusing dimension {n} > {limit}; raise with --max-dim", file=sys.stderr)
        return 2
    delta = parse_rat(args.delta)
    report = witmod.local_min_experiment(
        expr, delta, args.trials, args.seed, ladder=args.ladder
    )
    agg = report.aggregates
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        base = os.path.join(args.out, "experiment")
        if args.format in ("csv", "both"):
            with open(base + ".csv", "w") as fh:
                fh.write(witmod.report_to_csv(report))
        if args.format in ("json", "both"):
            with open(base + ".json", "w") as fh:
                fh.write(witmod.report_to_json(report))
    min_gaps = {
        d: agg["per_delta"][d]["min_gap"] for d in sorted(agg["per_delta"])
    }
    summary = {
        "min_gap_nonneg": agg["all_gaps_nonneg"],
        "min_gaps": {d: rat_str(v) for d, v in min_gaps.items()},
        "pairings_ok": agg["all_pairings_ok"],
        "scaling_vxvy_exponent": agg["vxvy_exponent"],
        "scaling_gap_exponent": agg["gap_exponent"],
        "failed_trials": agg["failed_trials"],
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    ok = agg["all_gaps_nonneg"] and agg["all_pairings_ok"] and not agg["failed_trials"]
    return 0 if ok else 1


def build_parser():
    p = argparse.ArgumentParser(prog="hannerlab")
    sub = p.add_subparsers(dest="command", required=True)

    def add_source(sp):
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--expr", help="expression, e.g. '(I1 +inf I2)'")
        src.add_argument("--graph", help="path to a graph JSON file")

    sp = sub.add_parser("build", help="polytope bundle for an expression or graph")
    add_source(sp)
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("graph", help="the graph of an expression")
    add_source(sp)
    sp.set_defaults(func=cmd_graph)

    sp = sub.add_parser("faces", help="all proper faces with dimensions and centroids")
    add_source(sp)
    sp.set_defaults(func=cmd_faces)

    sp = sub.add_parser("flags", help="flag count and a sample of chains")
    add_source(sp)
    sp.add_argument("--limit", type=int, default=10)
    sp.set_defaults(func=cmd_flags)

    sp = sub.add_parser("verify", help="exact identity suites")
    add_source(sp)
    sp.add_argument("--suite", choices=["abc", "equal-volumes", "derivative", "cl", "all"],
                    default="all")
    sp.add_argument("--max-dim", type=int, default=None)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("experiment", help="perturbation experiment")
    add_source(sp)
    sp.add_argument("--delta", required=True, help="rational p/q, e.g. 1/100")
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--ladder", action="store_true", help="also run delta/2 and delta/4")
    sp.add_argument("--out", help="directory for report files")
    sp.add_argument("--format", choices=["csv", "json", "both"], default="both")
    sp.add_argument("--max-dim", type=int, default=None)
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (hanner.ParseError, hanner.NotCographError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
