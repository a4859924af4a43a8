import random
from math import factorial

import pytest

from hannerlab import witness
from hannerlab.geometry import (
    DegenerateError,
    HPolytope,
    VPolytope,
    cut_slab,
    hausdorff2,
    hpolytope_from_json,
    hpolytope_to_json,
    hull_facets,
    linear_image,
    perturb,
    polar,
    point_distance2,
    project,
    proper_faces,
    section,
    section_vertices,
    volume,
    volume_product,
    vpolytope,
    vpolytope_from_json,
    vpolytope_to_json,
)
from hannerlab.hanner import canonical_trees, parse_expr
from hannerlab.linalg import Rat, basis_vec, det, dot, identity, vec

CUBE3 = parse_expr("(I1 +inf (I2 +inf I3))")
CROSS3 = parse_expr("(I1 +1 (I2 +1 I3))")
MIXED4 = parse_expr("((I1 +1 I2) +inf (I3 +1 I4))")


def signs(n):
    from itertools import product

    return [tuple(Rat(s) for s in p) for p in product((1, -1), repeat=n)]


def cube_poly(n):
    return vpolytope(signs(n))


def cross_poly(n):
    pts = []
    for i in range(n):
        pts.append(basis_vec(n, i))
        pts.append(tuple(-x for x in basis_vec(n, i)))
    return vpolytope(pts)


def random_symmetric(rng, n, pairs):
    pts = []
    while True:
        pts.clear()
        for _ in range(pairs):
            v = tuple(Rat(rng.randrange(-8, 9), 4) for _ in range(n))
            pts.append(v)
            pts.append(tuple(-x for x in v))
        try:
            return vpolytope(pts)
        except DegenerateError:
            continue


def random_unimodular(rng, n):
    m = [list(r) for r in identity(n)]
    for _ in range(3 * n):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        c = Rat(rng.randrange(-2, 3))
        for k in range(n):
            m[i][k] += c * m[j][k]
    return tuple(tuple(r) for r in m)


def test_hull_facets_cross3():
    h = hull_facets(cross_poly(3))
    assert len(h.rows) == 8
    assert all(all(abs(c) == 1 for c in a) for a in h.rows)


def test_hull_facets_square():
    h = hull_facets(cube_poly(2))
    assert set(h.rows) == {
        vec(1, 0), vec(-1, 0), vec(0, 1), vec(0, -1)
    }


def test_hull_facets_self_certifying_on_perturbed_cube():
    from hannerlab.linalg import rank, vsub

    k = perturb(CUBE3, Rat(1, 50), 99)
    h = hull_facets(k)
    for a in h.rows:
        tight = [v for v in k.vertices if dot(a, v) == 1]
        assert all(dot(a, v) <= 1 for v in k.vertices)
        # every inequality is tight on >= n affinely independent vertices
        assert len(tight) >= 3
        diffs = tuple(vsub(v, tight[0]) for v in tight[1:])
        assert rank(diffs) == 2


def test_vpolytope_removes_non_extreme_points():
    pts = signs(2) + [vec(0, Rat(1, 2)), vec(0, Rat(-1, 2))]
    p = vpolytope(pts)
    assert len(p.vertices) == 4


def test_polar_cube_is_cross():
    # the polar of the cube in inequality form: one row per cube vertex;
    # its vertex form is the cross-polytope
    h = polar(cube_poly(3))
    assert set(h.rows) == set(cube_poly(3).vertices)
    from hannerlab.geometry import vertex_form

    assert set(vertex_form(h).vertices) == set(cross_poly(3).vertices)


def test_polar_round_trip_random():
    rng = random.Random(7)
    for i in range(50):
        n = 4 if i % 5 == 0 else 3
        p = random_symmetric(rng, n, 4 if n == 4 else 5)
        pp = polar(polar(p))
        assert set(pp.vertices) == set(p.vertices)


def test_polar_of_linear_image():
    rng = random.Random(9)
    for _ in range(6):
        p = random_symmetric(rng, 3, 4)
        t = random_unimodular(rng, 3)
        tk = linear_image(p, t)
        lhs = set(hull_facets(tk).rows)
        # polar of TK = inverse-transpose image of the polar
        cols = tuple(zip(*t))
        from hannerlab.linalg import solve_unique

        polar_pts = [solve_unique(tuple(cols), a) for a in hull_facets(p).rows]
        # solve T^T x = a gives x = T^{-T} a
        assert lhs == set(tuple(x) for x in polar_pts)


def test_volume_cube_and_cross():
    assert volume(cube_poly(3)) == 8
    assert volume(cross_poly(3)) == Rat(4, 3)


def test_volume_linear_image_scales_by_det():
    rng = random.Random(13)
    for _ in range(5):
        p = random_symmetric(rng, 3, 4)
        t = random_unimodular(rng, 3)
        c = Rat(rng.randrange(1, 4), rng.randrange(1, 3))
        t = tuple(tuple(c * x for x in row) for row in t)
        assert volume(linear_image(p, t)) == abs(det(t)) * volume(p)


def flag_volume_oracle(p):
    """Independent volume: chains of the generic face lattice, with vertex
    averages as interior face points, summed as simplex volumes."""
    faces = proper_faces(p)
    n = p.n
    by_dim = {}
    reps = {}
    from hannerlab.linalg import rank, vsub

    for f in faces:
        base = f[0]
        r = rank(tuple(vsub(v, base) for v in f[1:])) if len(f) > 1 else 0
        by_dim.setdefault(r, []).append(f)
        avg = tuple(sum(c) / len(f) for c in zip(*f))
        reps[f] = avg
    chains = [[f] for f in by_dim.get(0, [])]
    for d in range(1, n):
        chains = [
            ch + [g]
            for ch in chains
            for g in by_dim.get(d, [])
            if set(ch[-1]) <= set(g)
        ]
    total = Rat(0)
    for ch in chains:
        rows = tuple(reps[f] for f in ch)
        total += abs(det(rows))
    return total / factorial(n)


def test_volume_agrees_with_flag_decomposition_oracle():
    rng = random.Random(17)
    for i in range(30):
        n = 4 if i % 5 == 0 else 3
        p = random_symmetric(rng, n, 4)
        assert volume(p) == flag_volume_oracle(p)
    k = perturb(CUBE3, Rat(1, 100), 3)
    assert volume(k) == flag_volume_oracle(k)


def test_volume_product_hanner_trees():
    for n in range(1, 5):
        for e in canonical_trees(n):
            hb = witness.hanner_body(e)
            assert volume_product(hb) == Rat(4 ** n, factorial(n))


def test_volume_product_invariance_under_unimodular_maps():
    rng = random.Random(19)
    hb = witness.hanner_body(CROSS3)
    for _ in range(4):
        t = random_unimodular(rng, 3)
        assert volume_product(linear_image(hb, t)) == Rat(32, 3)


def test_hausdorff_shrunk_cube():
    for n in (2, 3):
        big = cube_poly(n)
        small = vpolytope([
            tuple(Rat(9, 10) * c for c in v) for v in big.vertices
        ])
        assert hausdorff2(big, small) == Rat(1, 100) * n


def test_hausdorff_identical_and_symmetric():
    p = cube_poly(3)
    q = cross_poly(3)
    assert hausdorff2(p, p) == 0
    assert hausdorff2(p, q) == hausdorff2(q, p)


def test_point_distance_inside_is_zero():
    assert point_distance2(vec(Rat(1, 2), 0, 0), cube_poly(3)) == 0


def test_project_cross_to_plane():
    p = project(cross_poly(3), (1, 2))
    assert set(p.vertices) == set(cross_poly(2).vertices)


def test_section_cube_to_plane():
    h = section(hull_facets(cube_poly(3)), (1, 2))
    assert set(h.rows) == set(hull_facets(cube_poly(2)).rows)
    v = section_vertices(hull_facets(cube_poly(3)), (1, 2))
    assert set(v.vertices) == set(cube_poly(2).vertices)


def test_polar_of_section_is_projection_of_polar():
    rng = random.Random(23)
    for i in range(30):
        n = 4 if i % 6 == 0 else 3
        p = random_symmetric(rng, n, 4)
        h = hull_facets(p)
        subsets = [(1, 2), (2, 3), (1, n)]
        for coords in subsets:
            sec = section_vertices(h, coords)
            proj_of_polar = project(VPolytope(n, h.rows), coords)
            lhs = set(hull_facets(vpolytope(sec.vertices)).rows)
            assert lhs == set(proj_of_polar.vertices)


def test_perturb_zero_delta_is_identity():
    k = perturb(CUBE3, Rat(0), 5)
    assert set(k.vertices) == set(cube_poly(3).vertices)


def test_perturb_symmetric_and_bounded():
    for seed in range(6):
        k = perturb(MIXED4, Rat(1, 100), seed)
        vs = set(k.vertices)
        assert all(tuple(-x for x in v) in vs for v in vs)
        d2 = hausdorff2(k, witness.hanner_body(MIXED4))
        assert d2 <= Rat(1, 100) ** 2


def test_perturb_not_degenerate():
    hits = 0
    for seed in range(20):
        k = perturb(CUBE3, Rat(1, 20), seed)
        d2 = hausdorff2(k, witness.hanner_body(CUBE3))
        if d2 >= (Rat(1, 20) / 4) ** 2:
            hits += 1
    assert hits >= 1


def test_perturb_rejects_large_delta():
    with pytest.raises(ValueError):
        perturb(CUBE3, Rat(1, 2), 0)


def test_cut_slab():
    p = cube_poly(2)
    sliced = cut_slab(p, (Rat(2), Rat(0)))
    assert set(sliced.vertices) == {
        vec(Rat(1, 2), 1), vec(Rat(1, 2), -1),
        vec(Rat(-1, 2), 1), vec(Rat(-1, 2), -1),
    }
    assert volume(sliced) == 2
    untouched = cut_slab(p, (Rat(1, 2), Rat(0)))
    assert set(untouched.vertices) == set(p.vertices)


def test_json_round_trip():
    p = cross_poly(3)
    assert set(vpolytope_from_json(vpolytope_to_json(p)).vertices) == set(p.vertices)
    h = hull_facets(p)
    assert hpolytope_from_json(hpolytope_to_json(h)) == HPolytope(3, tuple(sorted(h.rows)))


def test_operations_commute_with_coordinate_permutations():
    rng = random.Random(29)
    p = random_symmetric(rng, 3, 4)
    perm = (2, 0, 1)
    permuted = vpolytope([tuple(v[i] for i in perm) for v in p.vertices])
    assert volume(permuted) == volume(p)
    assert volume_product(permuted) == volume_product(p)
