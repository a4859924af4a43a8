"""Canonical faces of a Hanner polytope and their tangency frames.

Faces are encoded recursively along the expression tree rather than as
vertex sets: a face of an l1 node is a pair (F1, empty), (empty, F2) or
(F1, F2) of faces of the children, and a face of an linf node is a pair
(F1, whole), (whole, F2) or (F1, F2).  The two improper faces `EMPTY`
(dimension -1) and `WHOLE` (dimension n) are first-class values; the
conventions dim(empty) = -1, centroid(empty) = 0 and empty* = whole make
the sum formulas below uniform.

Every proper face F carries an affine frame: an affine subspace A_F that
meets the polytope exactly at the face centroid c_F, has dimension
n - 1 - dim F, and pairs with the frame of the dual face F* so that
<x, y> = 1 for all x in A_F, y in A_{F*}.  The frames are built inductively:
at a leaf A_F is the face itself; an l1 pair takes the convex-weight
combination of the child frames with weights (dim+1)/(dim sum+2); an linf
pair takes the Minkowski sum of the child frames plus the line spanned by
c_{F1}/(dim H1 - dim F1) - c_{F2}/(dim H2 - dim F2).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import hanner
from .hanner import L1, LINF, Leaf, Node, dim, leaf_indices
from .linalg import (
    RONE,
    RZERO,
    Rat,
    affsub,
    affsub_combination,
    affsub_contains,
    affsub_sum,
    basis_vec,
    dot,
    vadd,
    vscale,
    zero_vec,
)
from .lp import LinProg, maximize


@dataclass(frozen=True)
class ImproperFace:
    kind: str  # "empty" | "whole"


EMPTY = ImproperFace("empty")
WHOLE = ImproperFace("whole")


@dataclass(frozen=True)
class LeafFace:
    sign: int  # +1 | -1


@dataclass(frozen=True)
class PairFace:
    left: object
    right: object


def is_proper(face):
    return not isinstance(face, ImproperFace)


def enumerate_faces(expr):
    """All proper faces, each exactly once, by the three-case recursion."""
    if isinstance(expr, Leaf):
        return (LeafFace(1), LeafFace(-1))
    lf = enumerate_faces(expr.left)
    rf = enumerate_faces(expr.right)
    out = []
    if expr.op == L1:
        out.extend(PairFace(f, EMPTY) for f in lf)
        out.extend(PairFace(EMPTY, f) for f in rf)
    else:
        out.extend(PairFace(f, WHOLE) for f in lf)
        out.extend(PairFace(WHOLE, f) for f in rf)
    out.extend(PairFace(a, b) for a in lf for b in rf)
    return tuple(out)


def face_dim(expr, face):
    """Dimension, with dim(empty) = -1 and dim(whole) = dim of the polytope.

    An l1 pair has dimension dim F1 + dim F2 + 1 and an linf pair
    dim F1 + dim F2, which covers the improper-component cases as well.
    """
    if face is EMPTY:
        return -1
    if face is WHOLE:
        return dim(expr)
    if isinstance(face, LeafFace):
        return 0
    d1 = face_dim(expr.left, face.left)
    d2 = face_dim(expr.right, face.right)
    return d1 + d2 + (1 if expr.op == L1 else 0)


def _embed(expr_index, n, sign=1):
    v = list(zero_vec(n))
    v[expr_index - 1] = RONE if sign > 0 else -RONE
    return tuple(v)


def centroid(expr, face, n=None):
    """Exact centroid of a proper face, embedded in R^n.

    linf pairs add centroids; l1 pairs combine them with weights
    (dim+1)/(dim1+dim2+2), the empty summand contributing dimension -1 and
    centroid 0.
    """
    if n is None:
        n = dim(expr)
    if not is_proper(face):
        raise ValueError("centroid of an improper face")
    return _centroid(expr, face, n)


def _centroid(expr, face, n):
    if face is EMPTY or face is WHOLE:
        return zero_vec(n)
    if isinstance(face, LeafFace):
        return _embed(expr.index, n, face.sign)
    c1 = _centroid(expr.left, face.left, n)
    c2 = _centroid(expr.right, face.right, n)
    if expr.op == LINF:
        return vadd(c1, c2)
    d1 = face_dim(expr.left, face.left)
    d2 = face_dim(expr.right, face.right)
    w1, w2 = _l1_weights(d1, d2)
    return vadd(vscale(w1, c1), vscale(w2, c2))


def _l1_weights(d1, d2):
    den = d1 + d2 + 2
    return Rat(d1 + 1, den), Rat(d2 + 1, den)


def dual_expr(expr):
    """The polar's expression tree: the same tree with l1 and linf swapped."""
    if isinstance(expr, Leaf):
        return expr
    return Node(LINF if expr.op == L1 else L1, dual_expr(expr.left), dual_expr(expr.right))


def dual_face(expr, face):
    """The dual face, as a face of `dual_expr(expr)`.

    On pairs: (F1, empty)* = (F1*, whole), (empty, F2)* = (whole, F2*),
    (F1, whole)* = (F1*, empty), (whole, F2)* = (empty, F2*), and
    (F1, F2)* = (F1*, F2*); whole* = empty and empty* = whole.  This is an
    order-reversing involution with dim F* = n - 1 - dim F.
    """
    if face is EMPTY:
        return WHOLE
    if face is WHOLE:
        return EMPTY
    if isinstance(face, LeafFace):
        return face
    return PairFace(dual_face(expr.left, face.left), dual_face(expr.right, face.right))


def face_leq(expr, f, g):
    """Exact containment of realized faces, computed summand-wise."""
    if f is EMPTY or g is WHOLE:
        return True
    if g is EMPTY:
        return f is EMPTY
    if f is WHOLE:
        return g is WHOLE
    if isinstance(f, LeafFace) or isinstance(g, LeafFace):
        return f == g
    return face_leq(expr.left, f.left, g.left) and face_leq(expr.right, f.right, g.right)


def realized_vertices(expr, face, n=None):
    """Vertex set of the realized face, via the extreme-point recursion."""
    if n is None:
        n = dim(expr)
    return tuple(sorted(_realized(expr, face, n)))


def _realized(expr, face, n):
    if face is EMPTY:
        return set()
    if face is WHOLE:
        if isinstance(expr, Leaf):
            return {_embed(expr.index, n, 1), _embed(expr.index, n, -1)}
        whole_pair = (
            PairFace(WHOLE, WHOLE) if expr.op == LINF else None
        )
        if expr.op == LINF:
            return _realized(expr, whole_pair, n)
        left = _realized(expr.left, WHOLE, n)
        right = _realized(expr.right, WHOLE, n)
        return left | right
    if isinstance(face, LeafFace):
        return {_embed(expr.index, n, face.sign)}
    lv = _realized(expr.left, face.left, n)
    rv = _realized(expr.right, face.right, n)
    if expr.op == L1:
        return lv | rv
    return {vadd(a, b) for a in lv for b in rv}


# ---------------------------------------------------------------------------
# affine frames


@dataclass(frozen=True)
class AffineFrame:
    face: object
    center: tuple  # the face centroid, the unique contact point with H
    sub: object  # AffSub through `center`

    @property
    def dirs(self):
        return self.sub.dirs


_frame_cache = {}


def affine_frame(expr, face, n=None):
    """Tangency frame (c_F, A_F) of a proper face, built inductively."""
    if n is None:
        n = dim(expr)
    if not is_proper(face):
        raise ValueError("no frame for improper faces")
    key = (expr, face, n)
    if key not in _frame_cache:
        sub = _frame_sub(expr, face, n)
        _frame_cache[key] = AffineFrame(face, _centroid(expr, face, n), sub)
    return _frame_cache[key]


def _span_of(expr, n):
    return tuple(basis_vec(n, j - 1) for j in leaf_indices(expr))


def _frame_sub(expr, face, n):
    if isinstance(face, LeafFace):
        return affsub(_embed(expr.index, n, face.sign), ())
    l, r = expr.left, expr.right
    if expr.op == L1:
        if face.right is EMPTY:
            a = _frame_sub(l, face.left, n)
            return affsub_sum(a, affsub(zero_vec(n), _span_of(r, n)))
        if face.left is EMPTY:
            a = _frame_sub(r, face.right, n)
            return affsub_sum(affsub(zero_vec(n), _span_of(l, n)), a)
        d1 = face_dim(l, face.left)
        d2 = face_dim(r, face.right)
        w1, w2 = _l1_weights(d1, d2)
        return affsub_combination(w1, _frame_sub(l, face.left, n), w2, _frame_sub(r, face.right, n))
    if face.right is WHOLE:
        return _frame_sub(l, face.left, n)
    if face.left is WHOLE:
        return _frame_sub(r, face.right, n)
    a1 = _frame_sub(l, face.left, n)
    a2 = _frame_sub(r, face.right, n)
    d1 = face_dim(l, face.left)
    d2 = face_dim(r, face.right)
    c1 = _centroid(l, face.left, n)
    c2 = _centroid(r, face.right, n)
    extra = vadd(vscale(Rat(1, dim(l) - d1), c1), vscale(-Rat(1, dim(r) - d2), c2))
    summed = affsub_sum(a1, a2)
    return affsub(summed.point, summed.dirs + (extra,))


def all_frames(expr):
    """Frames of all proper faces, keyed by face."""
    n = dim(expr)
    return {f: affine_frame(expr, f, n) for f in enumerate_faces(expr)}


# ---------------------------------------------------------------------------
# exact verification of the frame conditions


@dataclass(frozen=True)
class FrameReport:
    ok: bool
    failures: tuple  # (face, condition-name) pairs


def polytope_rows(expr):
    """Facet inequalities of the polytope: its polar's vertex vectors."""
    return hanner.polar_vertex_vectors(expr)


def _coordinate_range_zero(rows, center, dirs, n):
    """True iff every coordinate is constant on {x in A : rows x <= 1}."""
    if not dirs:
        return True
    cons_rows = tuple(tuple(dot(a, d) for d in dirs) for a in rows)
    cons_rhs = tuple(RONE - dot(a, center) for a in rows)
    for i in range(n):
        obj = tuple(d[i] for d in dirs)
        for sgn in (1, -1):
            o = tuple(sgn * c for c in obj) if sgn < 0 else obj
            out = maximize(LinProg(o, cons_rows, cons_rhs))
            if out.status != "optimal" or out.value != 0:
                return False
    return True


def _centroid_in_relative_interior(expr, face, n):
    """LP check: c_F is a strictly positive convex combination of the
    face's vertices."""
    verts = realized_vertices(expr, face, n)
    c = _centroid(expr, face, n)
    k = len(verts)
    if k == 1:
        return verts[0] == c
    # variables (lambda_1..lambda_k, s); maximize s subject to
    # sum lambda_i v_i = c, sum lambda_i = 1, lambda_i >= s
    rows = []
    rhs = []
    for i in range(n):
        row = tuple(v[i] for v in verts) + (RZERO,)
        rows.append(row)
        rhs.append(c[i])
        rows.append(tuple(-x for x in row))
        rhs.append(-c[i])
    ones = (RONE,) * k + (RZERO,)
    rows.append(ones)
    rhs.append(RONE)
    rows.append(tuple(-x for x in ones))
    rhs.append(-RONE)
    for i in range(k):
        row = [RZERO] * (k + 1)
        row[i] = -RONE
        row[k] = RONE
        rows.append(tuple(row))
        rhs.append(RZERO)
    obj = (RZERO,) * k + (RONE,)
    out = maximize(LinProg(obj, tuple(rows), tuple(rhs)))
    return out.status == "optimal" and out.value > 0


def verify_frame_conditions(expr):
    """Exactly verify, for every proper face F with frame (c_F, A_F):

    (a) A_F meets the polytope only at c_F, and c_F is in the relative
        interior of F (checked by 2n coordinate LPs plus a convex-weight LP);
    (b) dim A_F + dim F = n - 1;
    (c) <c_F, c_F*> = 1 and all direction/center cross pairings with the
        dual frame vanish.
    """
    n = dim(expr)
    rows = polytope_rows(expr)
    dexpr = dual_expr(expr)
    failures = []
    for face in enumerate_faces(expr):
        fr = affine_frame(expr, face, n)
        dfr = affine_frame(dexpr, dual_face(expr, face), n)
        if len(fr.dirs) != n - 1 - face_dim(expr, face):
            failures.append((face, "b"))
        if not affsub_contains(fr.sub, fr.center):
            failures.append((face, "a:center-in-subspace"))
        if not _coordinate_range_zero(rows, fr.center, fr.dirs, n):
            failures.append((face, "a:contact"))
        if not _centroid_in_relative_interior(expr, face, n):
            failures.append((face, "a:interior"))
        ok_c = dot(fr.center, dfr.center) == 1
        ok_c = ok_c and all(dot(d, dfr.center) == 0 for d in fr.dirs)
        ok_c = ok_c and all(dot(fr.center, d) == 0 for d in dfr.dirs)
        ok_c = ok_c and all(dot(d, e) == 0 for d in fr.dirs for e in dfr.dirs)
        if not ok_c:
            failures.append((face, "c"))
    return FrameReport(not failures, tuple(failures))


def pairing_gap(expr):
    """1 - max{<c_F, c_G*>} over ordered face pairs with F not contained
    in G; positive for every Hanner polytope."""
    n = dim(expr)
    dexpr = dual_expr(expr)
    faces = enumerate_faces(expr)
    cents = {f: _centroid(expr, f, n) for f in faces}
    dual_cents = {f: _centroid(dexpr, dual_face(expr, f), n) for f in faces}
    best = None
    for f in faces:
        cf = cents[f]
        for g in faces:
            if face_leq(expr, f, g):
                continue
            val = dot(cf, dual_cents[g])
            if best is None or val > best:
                best = val
    if best is None:
        raise ValueError("polytope has no incomparable face pairs")
    return RONE - best


# ---------------------------------------------------------------------------
# JSON encoding of faces (mirrors the tree)


def face_to_json(face):
    if face is EMPTY:
        return "empty"
    if face is WHOLE:
        return "whole"
    if isinstance(face, LeafFace):
        return {"sign": face.sign}
    return {"left": face_to_json(face.left), "right": face_to_json(face.right)}


def face_from_json(data):
    if data == "empty":
        return EMPTY
    if data == "whole":
        return WHOLE
    if "sign" in data:
        sign = int(data["sign"])
        if sign not in (1, -1):
            raise ValueError("leaf sign must be +-1")
        return LeafFace(sign)
    return PairFace(face_from_json(data["left"]), face_from_json(data["right"]))
