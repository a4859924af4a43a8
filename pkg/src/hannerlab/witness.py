"""Tangency witnesses for a body near a Hanner polytope, and the
local-minimality experiment.

For a convex body K with the origin interior and a face F of the reference
Hanner polytope, the frame subspace A_F is dilated from the origin until it
is tangent to K; t_F is the dilation factor, y_F = t_F c_F sits on the ray
through the face centroid, and x_F is the point of the tangency set nearest
to y_F.  The dual body K-polar gets the same construction over the polar's
faces.  Exactness gives the algebraic identities

    <x_F, x_F*> = <y_F, y_F*> = 1  and  t_F t_F* = 1

for every face, and the product of the scaled-centroid volumes dominates the
volume product of the reference polytope.

The experiment perturbs the polytope's vertices by a seeded rational amount
delta, normalizes the body back into the slab position (between the
cross-polytope and the cube), builds the full witness, and records exact
volume products, witness volumes and distances per trial.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass
from itertools import product as iproduct

from . import faces as facemod
from . import flags as flagmod
from . import geometry as geom
from . import hanner
from .linalg import (
    RONE,
    RZERO,
    Rat,
    basis_vec,
    det,
    dot,
    is_zero_vec,
    norm2,
    orth_complement_dim,
    rat_str,
    vadd,
    vscale,
    vsub,
    zero_vec,
)
from .lp import LinProg, LpOutcome, maximize, nearest_point, tangency_subspace


class FrameError(ValueError):
    pass


class NormalizationError(ValueError):
    """The slab-position construction failed its postcondition."""


@dataclass(frozen=True)
class TangencyResult:
    t: object
    x: tuple
    y: tuple
    functional: tuple  # supporting functional u with <u, x> = 1 on the tangent plane
    tight: tuple


def _tangency_lp(lp_rows, keep):
    obj = (RONE,) + (RZERO,) * (len(lp_rows[0]) - 1)
    sel_rows = tuple(lp_rows[i] for i in keep)
    return maximize(LinProg(obj, sel_rows, (RONE,) * len(sel_rows)))


def tangency(rows, frame):
    """Dilate the frame subspace until tangent to {x : rows x <= 1}.

    Solved as the LP  max t  s.t.  <a, t c + sum mu_j d_j> <= 1; the tangency
    set is recovered from the dual multipliers (rows with positive dual are
    tight on every optimal point) and x is its nearest point to y = t c.

    Only rows whose functional is large at the frame center can bind near
    tangency, so the LP is solved on that subset first and re-solved with any
    violated row added; the zero-extended duals certify the full program
    exactly, so the pruning never changes the answer.
    """
    c = frame.center
    dirs = frame.dirs
    lp_rows = tuple((dot(a, c),) + tuple(dot(a, d) for d in dirs) for a in rows)
    keep = [i for i, r in enumerate(lp_rows) if r[0] >= Rat(1, 2)]
    if not keep:
        keep = list(range(len(rows)))
    keep_set = set(keep)
    while True:
        out = _tangency_lp(lp_rows, keep)
        if out.status != "optimal":
            raise FrameError(f"tangency program is {out.status}; invalid frame")
        w = out.witness
        violated = [
            i
            for i, r in enumerate(lp_rows)
            if i not in keep_set and dot(r, w) > 1
        ]
        if not violated:
            break
        keep.extend(violated)
        keep_set.update(violated)
    full_duals = [RZERO] * len(rows)
    for i, y in zip(keep, out.duals):
        full_duals[i] = y
    out = LpOutcome(
        "optimal", out.value, out.witness, out.tight, tuple(full_duals)
    )
    t = out.value
    if t <= 0:
        raise FrameError("tangency factor must be positive")
    y = vscale(t, c)
    u_raw = zero_vec(len(c))
    for yi, a in zip(out.duals, rows):
        if yi != 0:
            u_raw = vadd(u_raw, vscale(yi, a))
    functional = vscale(1 / t, u_raw)
    if all(dot(a, y) <= 1 for a in rows):
        # y itself lies on the tangency set, so it is its own projection
        x = y
    else:
        eq_rows = tuple(a for yi, a in zip(out.duals, rows) if yi > 0)
        onto = tangency_subspace(y, dirs, eq_rows, (RONE,) * len(eq_rows))
        if onto is None:
            raise FrameError("tangency set is empty; inconsistent duals")
        witness_pt = y
        tk, mu = out.witness[0], out.witness[1:]
        witness_pt = vscale(tk, c)
        for m, d in zip(mu, dirs):
            witness_pt = vadd(witness_pt, vscale(m, d))
        if onto.dim == 0:
            x = onto.point
            if any(dot(a, x) > 1 for a in rows):
                raise FrameError("tangency point left the body")
        else:
            x = nearest_point(
                y, tuple((a, RONE) for a in rows), onto, anchor=witness_pt
            )
    tight = tuple(i for i, a in enumerate(rows) if dot(a, x) == 1)
    return TangencyResult(t, x, y, functional, tight)


@dataclass(frozen=True)
class Witness:
    expr: object
    primal: dict  # face -> TangencyResult, over faces of the tree
    dual: dict  # face of the dual tree -> TangencyResult

    def assignment(self, which, side="primal"):
        source = self.primal if side == "primal" else self.dual
        return {f: getattr(r, which) for f, r in source.items()}


def build_witness(kp, expr):
    """Full tangency data of a body and its polar against every face.

    `kp` is a V-polytope; its polar is obtained by swapping the vertex and
    facet descriptions.  Raises PerturbationTooLarge when some flag
    determinant of the x-points vanishes or changes sign relative to the
    centroid reference (the frozen-sign volume calculus then no longer
    applies)."""
    rows = geom.hull_facets(kp).rows
    dexpr = facemod.dual_expr(expr)
    primal = {}
    for face in facemod.enumerate_faces(expr):
        fr = facemod.affine_frame(expr, face)
        primal[face] = tangency(rows, fr)
    dual = {}
    polar_rows = kp.vertices
    for face in facemod.enumerate_faces(dexpr):
        fr = facemod.affine_frame(dexpr, face)
        dual[face] = tangency(polar_rows, fr)
    w = Witness(expr, primal, dual)
    _check_signs(expr, w.assignment("x"))
    _check_signs(dexpr, w.assignment("x", "dual"))
    return w


def _check_signs(expr, x_assign):
    for fb in flagmod.flag_bases(expr):
        rows = tuple(x_assign[f] for f in fb.flag.faces)
        d = det(rows)
        if d == 0 or (d > 0) != (fb.base_det > 0):
            raise flagmod.PerturbationTooLarge(
                "x-point flag determinant vanished or flipped sign"
            )


def pairing_report(w):
    """Exact per-face verification of the duality identities."""
    expr = w.expr
    failures = []
    for face, res in w.primal.items():
        dres = w.dual[facemod.dual_face(expr, face)]
        if dot(res.x, dres.x) != 1:
            failures.append((face, "x-pairing"))
        if dot(res.y, dres.y) != 1:
            failures.append((face, "y-pairing"))
        if res.t * dres.t != 1:
            failures.append((face, "t-product"))
    return (not failures), tuple(failures)


def witness_volumes(w):
    """V(X), V(Y), V(X*), V(Y*) for the witness, exact."""
    expr = w.expr
    dexpr = facemod.dual_expr(expr)
    vx = flagmod.volume_function(w.assignment("x"), expr)
    vy = flagmod.volume_function(w.assignment("y"), expr)
    vxs = flagmod.volume_function(w.assignment("x", "dual"), dexpr)
    vys = flagmod.volume_function(w.assignment("y", "dual"), dexpr)
    return vx, vy, vxs, vys


def scaled_centroid_product_check(w):
    """Exact comparison V(Y) V(Y*) >= V(C) V(C*); returns (lhs, rhs, ok)."""
    expr = w.expr
    dexpr = facemod.dual_expr(expr)
    _, vy, _, vys = witness_volumes(w)
    vc = flagmod.volume_function(flagmod.centroid_assignment(expr), expr)
    vcs = flagmod.volume_function(flagmod.centroid_assignment(dexpr), dexpr)
    lhs = vy * vys
    rhs = vc * vcs
    return lhs, rhs, lhs >= rhs


def witness_volume_gaps(w):
    """(|V(X) - V(Y)|, |V(X*) - V(Y*)|), exact."""
    vx, vy, vxs, vys = witness_volumes(w)
    return abs(vx - vy), abs(vxs - vys)


# ---------------------------------------------------------------------------
# slab-position normalization


_facet_face_cache = {}


def _coordinate_faces(expr):
    """The face with centroid e_j, for each coordinate j."""
    if expr in _facet_face_cache:
        return _facet_face_cache[expr]
    n = hanner.dim(expr)
    out = {}
    for face in facemod.enumerate_faces(expr):
        c = facemod.centroid(expr, face, n)
        for j in range(1, n + 1):
            if c == basis_vec(n, j - 1):
                out[j] = face
    if len(out) != n:
        raise FrameError("missing coordinate faces")
    _facet_face_cache[expr] = out
    return out


def _lex_min_unit(vectors):
    return min(vectors)


def normalize_position(kp, expr):
    """Move the body into the slab position: cross-polytope inside, cube
    outside, exactly.

    For each coordinate j the frame of the face with centroid e_j is dilated
    to tangency at x_j with supporting functional u_j; theta_j is then an
    exact normal to

        (span({e_j} union {e_i : i not~ j}) meet u_j-perp) + span{x_i : i ~ j},

    the linear map T1 takes each tangent hyperplane x_j + theta_j-perp to the
    coordinate slab e_j + e_j-perp, T2 rescales so each e_j is on the
    boundary, and the cube is cut off.  The postconditions are verified
    exactly and a violation raises NormalizationError."""
    n = hanner.dim(expr)
    g = hanner.graph_of(expr)
    rows = geom.hull_facets(kp).rows
    coord_faces = _coordinate_faces(expr)
    xs = {}
    us = {}
    for j in range(1, n + 1):
        fr = facemod.affine_frame(expr, coord_faces[j])
        res = tangency(rows, fr)
        xs[j] = res.x
        us[j] = res.functional
    t1_rows = []
    for j in range(1, n + 1):
        span_set = [basis_vec(n, j - 1)] + [
            basis_vec(n, i - 1) for i in range(1, n + 1) if i != j and not g.adjacent(i, j)
        ]
        u = us[j]
        coeff_row = tuple(dot(u, w) for w in span_set)
        inside = []
        for comb in orth_complement_dim((coeff_row,), len(span_set)):
            v = zero_vec(n)
            for c, w in zip(comb, span_set):
                v = vadd(v, vscale(c, w))
            if not is_zero_vec(v):
                inside.append(v)
        spanning = tuple(inside) + tuple(xs[i] for i in range(1, n + 1) if g.adjacent(i, j))
        normals = orth_complement_dim(spanning, n)
        if not normals:
            raise NormalizationError(f"no normal direction available at coordinate {j}")
        theta = _lex_min_unit(normals)
        if dot(theta, basis_vec(n, j - 1)) < 0:
            theta = vscale(Rat(-1), theta)
        denom = dot(xs[j], theta)
        if denom == 0:
            raise NormalizationError(f"degenerate tangent frame at coordinate {j}")
        t1_rows.append(vscale(1 / denom, theta))
    t1 = tuple(t1_rows)
    if det(t1) == 0:
        raise NormalizationError("slab map is singular")
    k1 = geom.linear_image(kp, t1)
    scale_rows = []
    for j in range(1, n + 1):
        e = basis_vec(n, j - 1)
        bounds = [dot(a, e) for a in geom.hull_facets(k1).rows if dot(a, e) > 0]
        if not bounds:
            raise NormalizationError(f"body unbounded along coordinate {j}")
        r = 1 / max(bounds)
        scale_rows.append(vscale(1 / r, e))
    k2 = geom.linear_image(k1, tuple(scale_rows))
    out = k2
    for j in range(n):
        out = geom.cut_slab(out, basis_vec(n, j))
    for j in range(n):
        e = basis_vec(n, j)
        if any(dot(a, e) > 1 for a in geom.hull_facets(out).rows):
            raise NormalizationError("cross-polytope vertex left the body")
    for v in out.vertices:
        if any(abs(c) > 1 for c in v):
            raise NormalizationError("body escapes the cube")
    return out


def _axis_polytopes(m):
    cube_verts = tuple(sorted(tuple(Rat(s) for s in signs) for signs in iproduct((1, -1), repeat=m)))
    cube_rows = tuple(sorted(basis_vec(m, i) for i in range(m)) + sorted(vscale(Rat(-1), basis_vec(m, i)) for i in range(m)))
    cube = geom.with_known_facets(cube_verts, cube_rows)
    cross = geom.with_known_facets(cube_rows, cube_verts)
    return cube, cross


def projection_section_diagnostics(kp, expr):
    """Distances of coordinate projections to sub-cubes and coordinate
    sections to sub-cross-polytopes, per vertex support.

    Requires the body already in the slab position.  Antipodal vertices share
    a support, so each support is reported once.  Returns a dict with the
    per-support squared distances, their maximum, and the ratio of that
    maximum to the squared distance from the body to the polytope."""
    n = hanner.dim(expr)
    h_body = hanner_body(expr)
    proj = {}
    for v in hanner.vertices(expr):
        s = v.support
        if s in proj:
            continue
        m = len(s)
        cube, _ = _axis_polytopes(m)
        proj[s] = geom.hausdorff2(geom.project(kp, s), cube)
    sect = {}
    hrows = geom.hull_facets(kp)
    for v in hanner.polar_vertices(expr):
        s = v.support
        if s in sect:
            continue
        m = len(s)
        _, cross = _axis_polytopes(m)
        sect[s] = geom.hausdorff2(geom.section_vertices(hrows, s), cross)
    top = max(list(proj.values()) + list(sect.values()))
    d2 = geom.hausdorff2(kp, h_body)
    return {
        "projections": proj,
        "sections": sect,
        "max": top,
        "body_distance2": d2,
        "ratio": (top / d2) if d2 != 0 else None,
    }


# ---------------------------------------------------------------------------
# experiment driver


_h_body_cache = {}


def hanner_body(expr):
    """The reference polytope with both descriptions known exactly (its
    facet vectors are the polar's vertices)."""
    if expr not in _h_body_cache:
        verts = hanner.vertex_vectors(expr)
        rows = hanner.polar_vertex_vectors(expr)
        _h_body_cache[expr] = geom.with_known_facets(verts, rows)
    return _h_body_cache[expr]


@dataclass(frozen=True)
class TrialRow:
    trial: int
    delta: object
    rejections: int
    d2_raw: object
    d2_norm: object
    p_body: object
    p_ref: object
    gap: object
    v_x: object
    v_y: object
    v_xs: object
    v_ys: object
    dv_x: object
    dv_xs: object
    centroid_slack: object  # V(Y)V(Y*) - |H||H*|
    pairing_ok: bool
    xc_ratio: object | None  # max_F |x_F - c_F|^2 / d2_norm
    error: str | None = None


@dataclass(frozen=True)
class ExperimentReport:
    expr_text: str
    deltas: tuple
    trials: int
    seed: int
    rows: tuple
    aggregates: dict


def _mix_seed(seed, trial, attempt):
    return (int(seed) * 1_000_003 + trial) * 101 + attempt


def _metrics_for(expr, kp_raw, h_body, p_ref, trial, delta, rejections):
    d2_raw = geom.hausdorff2(kp_raw, h_body)
    kp = normalize_position(kp_raw, expr)
    w = build_witness(kp, expr)
    d2_norm = geom.hausdorff2(kp, h_body)
    p_body = geom.volume_product(kp)
    vx, vy, vxs, vys = witness_volumes(w)
    ok, _ = pairing_report(w)
    slack = vy * vys - p_ref
    cents = flagmod.centroid_assignment(expr)
    ratio = None
    if d2_norm != 0:
        worst = max(norm2(vsub(res.x, cents[f])) for f, res in w.primal.items())
        ratio = worst / d2_norm
    return TrialRow(
        trial=trial,
        delta=delta,
        rejections=rejections,
        d2_raw=d2_raw,
        d2_norm=d2_norm,
        p_body=p_body,
        p_ref=p_ref,
        gap=p_body - p_ref,
        v_x=vx,
        v_y=vy,
        v_xs=vxs,
        v_ys=vys,
        dv_x=abs(vx - vy),
        dv_xs=abs(vxs - vys),
        centroid_slack=slack,
        pairing_ok=ok,
        xc_ratio=ratio,
    )


def _run_trial(args):
    expr_text, delta_strs, seed, trial, max_attempts = args
    expr = hanner.parse_expr(expr_text)
    deltas = tuple(Rat(int(p), int(q)) for p, q in delta_strs)
    h_body = hanner_body(expr)
    p_ref = geom.volume_product(h_body)
    rejections = 0
    for attempt in range(max_attempts):
        mixed = _mix_seed(seed, trial, attempt)
        try:
            return [
                _metrics_for(
                    expr,
                    geom.perturb(expr, d, mixed),
                    h_body,
                    p_ref,
                    trial,
                    d,
                    rejections,
                )
                for d in deltas
            ]
        except flagmod.PerturbationTooLarge:
            rejections += 1
    return [
        TrialRow(
            trial=trial, delta=d, rejections=rejections,
            d2_raw=None, d2_norm=None, p_body=None, p_ref=p_ref, gap=None,
            v_x=None, v_y=None, v_xs=None, v_ys=None, dv_x=None, dv_xs=None,
            centroid_slack=None, pairing_ok=False, xc_ratio=None,
            error="perturbation rejected too many times",
        )
        for d in deltas
    ]


def local_min_experiment(expr, delta, trials, seed, ladder=False, max_attempts=50):
    """Perturb, normalize, witness: the full exact pipeline per trial.

    With `ladder` the same perturbation directions are rerun at delta,
    delta/2 and delta/4, so consecutive rows of a trial are directly
    comparable for scaling fits.  Per-trial failures are recorded on the
    row, never aborting the batch."""
    delta = Rat(delta)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    deltas = (delta, delta / 2, delta / 4) if ladder else (delta,)
    delta_strs = tuple((int(d.numerator), int(d.denominator)) for d in deltas)
    expr_text = hanner.format_expr(expr)
    jobs = [(expr_text, delta_strs, int(seed), t, max_attempts) for t in range(trials)]
    threads = int(os.environ.get("HANNERLAB_THREADS", "1"))
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            nested = list(pool.map(_run_trial, jobs))
    else:
        nested = [_run_trial(j) for j in jobs]
    rows = tuple(r for batch in nested for r in batch)
    aggregates = _aggregate(rows, deltas)
    return ExperimentReport(expr_text, deltas, trials, int(seed), rows, aggregates)


def _log2_float(x):
    import math

    return math.log2(float(x))


def _aggregate(rows, deltas):
    ok_rows = [r for r in rows if r.error is None]
    agg = {
        "failed_trials": sorted({r.trial for r in rows if r.error is not None}),
        "rejections": sum(r.rejections for r in rows if r.delta == deltas[0]),
        "all_pairings_ok": all(r.pairing_ok for r in ok_rows),
        "all_centroid_slack_nonneg": all(r.centroid_slack >= 0 for r in ok_rows),
        "all_gaps_nonneg": all(r.gap >= 0 for r in ok_rows),
        "norm_bound_fraction": None,
        "per_delta": {},
        "vxvy_log2_ratios": [],
        "gap_log2_ratios": [],
        "max_xc_ratio": None,
    }
    bounded = [r for r in ok_rows if r.d2_raw != 0]
    if bounded:
        good = sum(1 for r in bounded if r.d2_norm <= 9 * r.d2_raw)
        agg["norm_bound_fraction"] = good / len(bounded)
    ratios = [r.xc_ratio for r in ok_rows if r.xc_ratio is not None]
    if ratios:
        agg["max_xc_ratio"] = max(ratios)
    for d in deltas:
        sub = [r for r in ok_rows if r.delta == d]
        if sub:
            agg["per_delta"][rat_str(d)] = {
                "trials": len(sub),
                "min_gap": min(r.gap for r in sub),
                "max_gap": max(r.gap for r in sub),
                "min_centroid_slack": min(r.centroid_slack for r in sub),
            }
    by_trial = {}
    for r in ok_rows:
        by_trial.setdefault(r.trial, {})[r.delta] = r
    for trial, sub in by_trial.items():
        for hi, lo in zip(deltas, deltas[1:]):
            if hi in sub and lo in sub:
                a, b = sub[hi], sub[lo]
                if a.dv_x and b.dv_x:
                    agg["vxvy_log2_ratios"].append(_log2_float(a.dv_x / b.dv_x))
                realized = (
                    a.gap and b.gap and a.gap > 0 and b.gap > 0
                    and a.d2_norm >= a.delta * a.delta / 64
                    and b.d2_norm >= b.delta * b.delta / 64
                )
                if realized:
                    agg["gap_log2_ratios"].append(_log2_float(a.gap / b.gap))
    for key, out in (("vxvy_log2_ratios", "vxvy_exponent"), ("gap_log2_ratios", "gap_exponent")):
        vals = agg[key]
        agg[out] = sum(vals) / len(vals) if vals else None
    return agg


# ---------------------------------------------------------------------------
# report serialization


_CSV_FIELDS = (
    "trial", "delta", "rejections", "d2_raw", "d2_norm", "p_body", "p_ref",
    "gap", "v_x", "v_y", "v_xs", "v_ys", "dv_x", "dv_xs", "centroid_slack",
    "pairing_ok", "xc_ratio", "error",
)

_DEC_FIELDS = ("delta", "d2_raw", "d2_norm", "p_body", "gap", "dv_x", "centroid_slack")


def report_to_csv(report):
    """One row per trial and delta; exact rationals as p/q strings plus
    labelled decimal-approximation convenience columns."""
    buf = io.StringIO()
    fields = list(_CSV_FIELDS) + [f"{f}_dec" for f in _DEC_FIELDS]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in report.rows:
        row = {}
        for f in _CSV_FIELDS:
            v = getattr(r, f)
            if v is None:
                row[f] = ""
            elif isinstance(v, bool):
                row[f] = str(v).lower()
            elif isinstance(v, (int, str)):
                row[f] = v
            else:
                row[f] = rat_str(v)
        for f in _DEC_FIELDS:
            v = getattr(r, f)
            row[f"{f}_dec"] = repr(float(v)) if v is not None else ""
        writer.writerow(row)
    return buf.getvalue()


def _jsonable(x):
    if x is None or isinstance(x, (bool, int, str)):
        return x
    if isinstance(x, float):
        return x
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return rat_str(x)


def report_to_json(report):
    data = {
        "expr": report.expr_text,
        "deltas": [rat_str(d) for d in report.deltas],
        "trials": report.trials,
        "seed": report.seed,
        "aggregates": _jsonable(report.aggregates),
        "rows": [
            {f: _jsonable(getattr(r, f)) for f in _CSV_FIELDS} for r in report.rows
        ],
    }
    return json.dumps(data, indent=2, sort_keys=True)
