"""Generic symmetric rational polytopes, exact.

V-polytopes carry their vertex set (closed under negation, canonicalized so
no vertex lies in the hull of the others); H-polytopes carry inequality
vectors a meaning <a, x> <= 1, also closed under negation.  Facet
enumeration is brute force over n-subsets of vertices, which is exact and
entirely adequate at the dimensions this package targets (n <= 6).

Polarity is the engine behind most conversions: for a symmetric polytope
with the origin interior, the inequality vectors of K are exactly the
vertices of K's polar, so converting an H-polytope to vertex form is the
same computation as taking the convex hull of its inequality vectors.

Volumes are computed by the facet-pyramid recursion
vol = (1/n) * sum over facets of (support height) * (facet volume), with the
facet volume obtained exactly by projecting out one coordinate (the height
and the projection Jacobian combine into a rational factor 1/|a_i|).
Hausdorff distances are reported as exact squared distances: the farthest
point of a polytope from a convex set is a vertex, and each vertex-to-body
distance is an exact least-squares minimum over the body's faces.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import gcd

from itertools import combinations

from .linalg import (
    RONE,
    RZERO,
    Rat,
    dot,
    is_zero_vec,
    kernel,
    mat_vec,
    norm2,
    rank,
    rref,
    solve,
    solve_unique,
    vadd,
    vneg,
    vscale,
    vsub,
)


class DegenerateError(ValueError):
    pass


@dataclass(frozen=True)
class VPolytope:
    n: int
    vertices: tuple

    def __post_init__(self):
        vs = set(self.vertices)
        if any(vneg(v) not in vs for v in vs):
            raise ValueError("vertex set is not symmetric")


@dataclass(frozen=True)
class HPolytope:
    n: int
    rows: tuple

    def __post_init__(self):
        rs = set(self.rows)
        if any(vneg(a) not in rs for a in rs):
            raise ValueError("inequality set is not symmetric")


# ---------------------------------------------------------------------------
# hulls


def _facet_rows_of_points(points, n):
    """All facet vectors a with <a, p> <= 1 for every p, each facet hyperplane
    spanned by n linearly independent points of the set."""
    rows = set()
    pts = list(points)
    m = len(pts)
    ones = (RONE,) * n
    for sub in combinations(range(m), n):
        mat_rows = tuple(pts[i] for i in sub)
        res = solve(mat_rows, ones)
        if res.status != "unique":
            continue
        a = res.particular
        if a in rows:
            continue
        if all(dot(a, p) <= 1 for p in pts):
            rows.add(a)
    return rows


def _canonical_vertices(points, rows, n):
    """Points whose tight inequality vectors span R^n: exactly the extreme
    points once `rows` is the complete facet list."""
    verts = []
    for p in points:
        tight = [a for a in rows if dot(a, p) == 1]
        if len(tight) >= n and rank(tuple(tight)) == n:
            verts.append(p)
    return tuple(sorted(verts))


_hull_cache = {}


def vpolytope(points):
    """Canonical V-polytope from a symmetric point family (hull vertices only)."""
    pts = tuple(sorted(set(tuple(Rat(c) for c in p) for p in points)))
    if not pts:
        raise DegenerateError("no points")
    n = len(pts[0])
    if rank(pts) != n:
        raise DegenerateError("point set is not full-dimensional")
    rows = _facet_rows_of_points(pts, n)
    verts = _canonical_vertices(pts, rows, n)
    vp = VPolytope(n, verts)
    _hull_cache[vp] = HPolytope(n, tuple(sorted(rows)))
    return vp


def hull_facets(vp):
    """Irredundant facet inequalities of a V-polytope, exact."""
    if vp not in _hull_cache:
        rows = _facet_rows_of_points(vp.vertices, vp.n)
        _hull_cache[vp] = HPolytope(vp.n, tuple(sorted(rows)))
    return _hull_cache[vp]


def with_known_facets(verts, rows):
    """Register a (vertices, facets) pair computed elsewhere (e.g. by
    polarity or halfspace cutting) so hull_facets is free."""
    vp = VPolytope(len(verts[0]), tuple(sorted(verts)))
    _hull_cache[vp] = HPolytope(vp.n, tuple(sorted(rows)))
    return vp


def polar(p):
    """Polar of a polytope with the origin interior; (K polar) polar = K.

    V to H: each vertex v becomes the inequality <v, x> <= 1, which is the
    polar body in inequality form.  H to V: the polar of {x : <a_i, x> <= 1}
    is conv{a_i}, canonicalized to its extreme points.
    """
    if isinstance(p, VPolytope):
        return HPolytope(p.n, tuple(sorted(p.vertices)))
    return vpolytope(p.rows)


def vertex_form(hp):
    """The body {x : <a_i, x> <= 1} itself, converted to vertex form.

    By polarity the vertices are the facet vectors of conv{a_i}; the brute
    force runs over n-subsets of the (canonicalized) tight constraints.
    """
    keeper = vpolytope(hp.rows)
    return with_known_facets(hull_facets(keeper).rows, keeper.vertices)


def polar_body(vp):
    """Polar as a V-polytope with its facets registered (both conversions
    are free once hull_facets(vp) is known)."""
    h = hull_facets(vp)
    return with_known_facets(h.rows, vp.vertices)


# ---------------------------------------------------------------------------
# volume


def _canonical_affine(a, b):
    l = 1
    for x in tuple(a) + (b,):
        d = int(Rat(x).denominator)
        l = l // gcd(l, d) * d
    ints = [int(x * l) for x in a] + [int(b * l)]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g:
        ints = [x // g for x in ints]
    lead = next((x for x in ints if x != 0), 0)
    if lead < 0:
        ints = [-x for x in ints]
    return tuple(ints)


def _facets_affine(points, d):
    """Supporting hyperplanes (a, b, tight points) of a full-dimensional
    point set in R^d, oriented so <a, p> <= b for all points."""
    seen = {}
    pts = list(points)
    for sub in combinations(range(len(pts)), d):
        base = pts[sub[0]]
        diffs = tuple(vsub(pts[i], base) for i in sub[1:])
        if d == 1:
            normals = ((RONE,),)
        else:
            normals = kernel(diffs) if diffs else ()
        if len(normals) != 1:
            continue
        a = normals[0]
        b = dot(a, base)
        lo = hi = False
        for p in pts:
            v = dot(a, p)
            if v > b:
                hi = True
            elif v < b:
                lo = True
            if hi and lo:
                break
        if hi and lo:
            continue
        if hi:
            a, b = vneg(a), -b
        key = _canonical_affine(a, b)
        if key not in seen:
            seen[key] = (a, b)
    out = []
    for a, b in seen.values():
        tight = tuple(p for p in points if dot(a, p) == b)
        out.append((a, b, tight))
    return out


_vol_cache = {}


def _volume_of_points(points):
    """Exact volume of conv(points), full-dimensional in its ambient space."""
    key = frozenset(points)
    if key in _vol_cache:
        return _vol_cache[key]
    d = len(points[0])
    if d == 1:
        vals = [p[0] for p in points]
        res = max(vals) - min(vals)
        _vol_cache[key] = res
        return res
    z = points[0]
    total = RZERO
    for a, b, tight in _facets_affine(points, d):
        h = b - dot(a, z)
        if h == 0:
            continue
        i = next(j for j in range(d) if a[j] != 0)
        proj = tuple(sorted(set(p[:i] + p[i + 1 :] for p in tight)))
        total += _volume_of_points(proj) * h / (d * abs(a[i]))
    _vol_cache[key] = total
    return total


def volume(vp):
    """Exact volume via the facet-pyramid recursion from the origin.

    Each facet is projected out along a coordinate where its normal is
    nonzero; the support height and projection Jacobian combine into the
    rational factor 1/|a_i|.  Recursion runs over the cached face lattice,
    so ridge structure is reused instead of re-enumerating hulls."""
    n = vp.n
    if n == 1:
        vals = [v[0] for v in vp.vertices]
        return max(vals) - min(vals)
    lat = _lattice(vp)
    memo = {}

    def vol_in_chart(face, chart):
        # volume of the face projected onto the coordinate subset `chart`
        key = (face, chart)
        if key in memo:
            return memo[key]
        k = len(chart)
        pts = [tuple(v[i] for i in chart) for v in sorted(face)]
        if k == 1:
            vals = [p[0] for p in pts]
            res = max(vals) - min(vals)
        else:
            z = pts[0]
            res = RZERO
            for ridge in lat.children[face]:
                rpts = [tuple(v[i] for i in chart) for v in sorted(ridge)]
                diffs = tuple(vsub(p, rpts[0]) for p in rpts[1:])
                normals = kernel(diffs) if diffs else ()
                if len(normals) != 1:
                    continue
                a = normals[0]
                h = dot(a, rpts[0]) - dot(a, z)
                if h == 0:
                    continue
                if h < 0:
                    a, h = vneg(a), -h
                i = next(j for j in range(k) if a[j] != 0)
                sub_chart = chart[:i] + chart[i + 1 :]
                res += vol_in_chart(ridge, sub_chart) * h / (k * abs(a[i]))
        memo[key] = res
        return res

    full = tuple(range(n))
    total = RZERO
    for facet, facet_rows in lat.facet_rows.items():
        a = facet_rows[0]
        i = next(j for j in range(n) if a[j] != 0)
        total += vol_in_chart(facet, full[:i] + full[i + 1 :]) / (n * abs(a[i]))
    return total


def volume_product(vp):
    """|K| * |polar K|, exact."""
    return volume(vp) * volume(polar_body(vp))


# ---------------------------------------------------------------------------
# face lattices of generic polytopes, point distances, Hausdorff


class _Lattice:
    """All proper faces of a polytope as vertex sets, with dimensions,
    children (the faces one dimension lower), and cached affine-hull bases.

    Seeds with the facet vertex sets and closes under intersection; every
    proper face of a polytope is an intersection of facets."""

    def __init__(self, vp):
        rows = hull_facets(vp).rows
        facet_sets = {}
        for a in rows:
            tight = frozenset(v for v in vp.vertices if dot(a, v) == 1)
            if tight:
                facet_sets.setdefault(tight, []).append(a)
        faces = set(facet_sets)
        frontier = set(facet_sets)
        while frontier:
            new = set()
            for f in frontier:
                for g in facet_sets:
                    h = f & g
                    if h and h not in faces:
                        new.add(h)
            faces |= new
            frontier = new
        self.vp = vp
        self.rows = rows
        self.facet_rows = facet_sets
        self.faces = sorted(faces, key=lambda f: (len(f), sorted(f)))
        self.dim = {}
        self.basis = {}
        for f in self.faces:
            verts = sorted(f)
            v0 = verts[0]
            diffs = tuple(vsub(v, v0) for v in verts[1:])
            red = tuple(r for r in (rref(diffs)[0] if diffs else ()) if not is_zero_vec(r))
            self.dim[f] = len(red)
            self.basis[f] = (v0, red)
        self.by_dim = {}
        for f in self.faces:
            self.by_dim.setdefault(self.dim[f], []).append(f)
        self.children = {f: [] for f in self.faces}
        for f in self.faces:
            d = self.dim[f]
            for g in self.by_dim.get(d - 1, ()):
                if g < f:
                    self.children[f].append(g)


_lattice_cache = {}


def _lattice(vp):
    if vp not in _lattice_cache:
        _lattice_cache[vp] = _Lattice(vp)
    return _lattice_cache[vp]


def proper_faces(vp):
    """Vertex sets of all proper faces, smallest first."""
    return tuple(tuple(sorted(f)) for f in _lattice(vp).faces)


def point_distance2(x, vp):
    """Exact squared Euclidean distance from x to the polytope.

    The projection of an exterior point lies on a face contained in some
    facet whose inequality the point violates, so only those faces are
    tested; each test is a least-squares projection onto the face's affine
    hull (reduced cached basis) plus an exact feasibility check."""
    lat = _lattice(vp)
    violated = [f for f, rs in lat.facet_rows.items() if any(dot(a, x) > 1 for a in rs)]
    if not violated:
        return RZERO
    candidates = set()
    for facet in violated:
        candidates.add(facet)
        for f in lat.faces:
            if f < facet:
                candidates.add(f)
    best = None
    for face in candidates:
        v0, basis = lat.basis[face]
        if basis:
            g = tuple(tuple(dot(a, b) for b in basis) for a in basis)
            res = solve(g, tuple(dot(a, vsub(x, v0)) for a in basis))
            y = v0
            for c, d in zip(res.particular, basis):
                y = vadd(y, vscale(c, d))
        else:
            y = v0
        if all(dot(a, y) <= 1 for a in lat.rows):
            d2 = norm2(vsub(x, y))
            if best is None or d2 < best:
                best = d2
    return best


def hausdorff2(p, q):
    """Exact squared Hausdorff distance between two V-polytopes."""
    d = RZERO
    for v in p.vertices:
        d = max(d, point_distance2(v, q))
    for w in q.vertices:
        d = max(d, point_distance2(w, p))
    return d


# ---------------------------------------------------------------------------
# coordinate projections and sections


def project(vp, coords):
    """Orthogonal projection onto the listed (1-based) coordinates."""
    coords = tuple(coords)
    if not coords:
        raise ValueError("empty coordinate set")
    pts = [tuple(v[j - 1] for j in coords) for v in vp.vertices]
    return vpolytope(pts)


def section(hp, coords):
    """Coordinate section {x : x_j = 0 outside coords}, as an irredundant
    H-polytope on the listed (1-based) coordinates."""
    coords = tuple(coords)
    if not coords:
        raise ValueError("empty coordinate set")
    rows = set()
    for a in hp.rows:
        r = tuple(a[j - 1] for j in coords)
        if not is_zero_vec(r):
            rows.add(r)
    # irredundant rows = extreme points of the row set's hull
    keeper = vpolytope(rows)
    return HPolytope(len(coords), keeper.vertices)


def section_vertices(hp, coords):
    """The section as a V-polytope (vertices = facet vectors of the row hull)."""
    coords = tuple(coords)
    rows = set()
    for a in hp.rows:
        r = tuple(a[j - 1] for j in coords)
        if not is_zero_vec(r):
            rows.add(r)
    keeper = vpolytope(rows)
    return VPolytope(len(coords), hull_facets(keeper).rows)


# ---------------------------------------------------------------------------
# halfspace cuts (exact incremental intersection)


def _cut_halfspace_raw(verts, rows, a, n):
    """Intersect (verts, facet rows) with {x : <a, x> <= 1}.

    New vertices are exactly the crossings of the cut hyperplane with edges
    joining an inside vertex to an outside one (an edge is certified by a
    common tight row set of rank n-1).  Works on raw tuples so intermediate
    results need not be symmetric."""
    vals = {v: dot(a, v) for v in verts}
    outs = [v for v in verts if vals[v] > 1]
    if not outs:
        return verts, rows
    ins = [v for v in verts if vals[v] <= 1]
    if not ins:
        raise DegenerateError("halfspace cuts off the whole polytope")
    tight_rows = {v: tuple(r for r in rows if dot(r, v) == 1) for v in verts}
    new_pts = set()
    for u in outs:
        tu = set(tight_rows[u])
        for w in ins:
            common = tuple(r for r in tight_rows[w] if r in tu)
            if len(common) < n - 1 or rank(common) != n - 1:
                continue
            t = (RONE - vals[w]) / (vals[u] - vals[w])
            new_pts.add(vadd(w, vscale(t, vsub(u, w))))
    new_verts = tuple(sorted(set(ins) | new_pts))
    new_rows = []
    for r in tuple(rows) + (tuple(Rat(c) for c in a),):
        tight = [v for v in new_verts if dot(r, v) == 1]
        if len(tight) < n:
            continue
        base = tight[0]
        diffs = tuple(vsub(v, base) for v in tight[1:])
        if rank(diffs) == n - 1:
            new_rows.append(r)
    return new_verts, tuple(sorted(set(new_rows)))


def cut_slab(vp, a):
    """Exact intersection with the symmetric slab {x : |<a, x>| <= 1}."""
    a = tuple(Rat(c) for c in a)
    verts, rows = vp.vertices, hull_facets(vp).rows
    verts, rows = _cut_halfspace_raw(verts, rows, a, vp.n)
    verts, rows = _cut_halfspace_raw(verts, rows, vneg(a), vp.n)
    return with_known_facets(verts, rows)


def linear_image(vp, t_rows):
    """Image under the invertible linear map with the given matrix rows;
    vertices map forward, facet vectors by the inverse transpose."""
    n = vp.n
    cols = tuple(zip(*t_rows))
    inv_t_rows = []
    for i in range(n):
        e = tuple(RONE if j == i else RZERO for j in range(n))
        inv_t_rows.append(solve_unique(cols, e))
    # rows of T^(-T): columns of T^(-1); inv of transpose applied to a:
    # a' = T^(-T) a, so a'_i = <column i of T^(-1), a>
    inv_cols = tuple(zip(*inv_t_rows))
    verts = tuple(sorted(mat_vec(t_rows, v) for v in vp.vertices))
    rows = tuple(sorted(tuple(dot(c, a) for c in inv_cols) for a in hull_facets(vp).rows))
    return with_known_facets(verts, rows)


# ---------------------------------------------------------------------------
# symmetric perturbations


def perturb(expr, delta, seed):
    """Symmetric rational perturbation of a Hanner polytope's vertices.

    Each antipodal vertex pair +-v moves to +-(v + delta*u) with u a seeded
    rational direction of squared norm at most 1 (the same u for v and -v,
    preserving symmetry).  delta must satisfy 0 <= delta <= 1/8 so the origin
    stays interior.
    """
    from . import hanner

    delta = Rat(delta)
    if delta < 0 or delta > Rat(1, 8):
        raise ValueError("delta must lie in [0, 1/8]")
    verts = hanner.vertex_vectors(expr)
    n = len(verts[0])
    reps = sorted(v for v in verts if v > vneg(v))
    dirs = perturbation_directions(n, len(reps), seed)
    pts = []
    for v, u in zip(reps, dirs):
        w = vadd(v, vscale(delta, u))
        pts.append(w)
        pts.append(vneg(w))
    return vpolytope(pts)


def perturbation_directions(n, count, seed):
    """Seeded rational directions with 0 < |u|^2 <= 1, denominator 64."""
    rng = random.Random(int(seed))
    out = []
    while len(out) < count:
        u = tuple(Rat(rng.randrange(-64, 65), 64) for _ in range(n))
        if not is_zero_vec(u) and norm2(u) <= 1:
            out.append(u)
    return tuple(out)


# ---------------------------------------------------------------------------
# JSON forms


def _coord_pairs(v):
    return [[int(Rat(c).numerator), int(Rat(c).denominator)] for c in v]


def vpolytope_to_json(vp):
    return {"n": vp.n, "vertices": [_coord_pairs(v) for v in vp.vertices]}


def hpolytope_to_json(hp):
    return {"n": hp.n, "inequalities": [_coord_pairs(a) for a in hp.rows]}


def _from_pairs(row):
    return tuple(Rat(int(p), int(q)) for p, q in row)


def vpolytope_from_json(data):
    pts = [_from_pairs(row) for row in data["vertices"]]
    return vpolytope(pts)


def hpolytope_from_json(data):
    rows = tuple(sorted(_from_pairs(row) for row in data["inequalities"]))
    return HPolytope(int(data["n"]), rows)
