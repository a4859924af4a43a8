"""Flags of a Hanner polytope, simplex volumes, and exact derivatives.

A flag is an increasing chain of faces F^0 < F^1 < ... < F^(n-1) with
dim F^k = k.  Over an l1 or linf sum every flag decomposes uniquely into two
lower-dimensional flags plus a type: a tuple sigma in {1,2}^n recording which
summand grows at each step (n_1 ones and n_2 twos).  Writing sigma_j(k) for
the number of j's among the first k entries, the chain of a type-sigma flag is

    l1  sum:  F^(k-1) = (F_1^(sigma_1(k)-1), F_2^(sigma_2(k)-1)),
    linf sum: F^(n-k) = (F_1^(n_1-sigma_1(k)), F_2^(n_2-sigma_2(k))),

with index -1 meaning the empty face and index n_j the whole summand.  The
total number of flags is 2^n n!.

Given an assignment z of one point per face, each flag spans the simplex
conv{0, z_F^0, ..., z_F^(n-1)} of volume |det| / n!; the volume functional
sums these over all flags.  With the centroid assignment the determinants
are all nonzero, so locally the functional is a signed polynomial in the
points and its directional derivatives are exact cofactor sums.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import factorial

from .faces import EMPTY, WHOLE, PairFace, centroid, enumerate_faces, face_dim
from .hanner import L1, Leaf, dim
from .linalg import (
    RZERO,
    Rat,
    cofactor_matrix,
    det,
    dot,
    vadd,
    vscale,
)


class DegenerateBase(ValueError):
    """A base assignment with a vanishing flag determinant."""


class PerturbationTooLarge(ValueError):
    """A perturbation flipped the sign of some flag determinant."""


@dataclass(frozen=True)
class Flag:
    faces: tuple  # F^0 .. F^(n-1)
    sigma: tuple | None  # type over the root sum node; None for an interval
    lower: tuple | None  # (flag over left child, flag over right child)


def type_tuples(n1, n2):
    """All tuples in {1,2}^(n1+n2) with n1 ones and n2 twos."""
    n = n1 + n2
    out = []
    for ones in combinations(range(n), n1):
        ones = set(ones)
        out.append(tuple(1 if i in ones else 2 for i in range(n)))
    return tuple(out)


def prefix_counts(sigma, j):
    """sigma_j(k) for k = 0..n: occurrences of j among the first k entries."""
    out = [0]
    c = 0
    for s in sigma:
        if s == j:
            c += 1
        out.append(c)
    return tuple(out)


def assemble_flag(expr, f1, f2, sigma):
    """The unique flag of the given type with the given lower flags."""
    n1, n2 = dim(expr.left), dim(expr.right)
    if len(sigma) != n1 + n2 or sum(1 for s in sigma if s == 1) != n1:
        raise ValueError("type multiplicities do not match the summands")
    s1 = prefix_counts(sigma, 1)
    s2 = prefix_counts(sigma, 2)
    n = n1 + n2
    chain = [None] * n
    if expr.op == L1:
        for k in range(1, n + 1):
            a = f1.faces[s1[k] - 1] if s1[k] >= 1 else EMPTY
            b = f2.faces[s2[k] - 1] if s2[k] >= 1 else EMPTY
            chain[k - 1] = PairFace(a, b)
    else:
        for k in range(1, n + 1):
            i1 = n1 - s1[k]
            i2 = n2 - s2[k]
            a = f1.faces[i1] if i1 < n1 else WHOLE
            b = f2.faces[i2] if i2 < n2 else WHOLE
            chain[n - k] = PairFace(a, b)
    return Flag(tuple(chain), sigma, (f1, f2))


_flag_cache = {}


def all_flags(expr):
    """All flags, enumerated through the (type, lower flags) recursion."""
    if expr in _flag_cache:
        return _flag_cache[expr]
    if isinstance(expr, Leaf):
        from .faces import LeafFace

        flags = (
            Flag((LeafFace(1),), None, None),
            Flag((LeafFace(-1),), None, None),
        )
    else:
        lflags = all_flags(expr.left)
        rflags = all_flags(expr.right)
        sigmas = type_tuples(dim(expr.left), dim(expr.right))
        flags = tuple(
            assemble_flag(expr, f1, f2, sigma)
            for sigma in sigmas
            for f1 in lflags
            for f2 in rflags
        )
    _flag_cache[expr] = flags
    return flags


def enumerate_flags(expr):
    return iter(all_flags(expr))


def flag_count(expr):
    return len(all_flags(expr))


def lower_flags(expr, flag):
    """Decompose a flag over a sum node into its two lower flags and type."""
    if isinstance(expr, Leaf):
        raise ValueError("an interval has no lower flags")
    n1, n2 = dim(expr.left), dim(expr.right)
    chain = flag.faces if expr.op == L1 else tuple(reversed(flag.faces))
    sigma = []
    c1, c2 = [], []
    if expr.op == L1:
        d1 = d2 = -1
        for f in chain:
            nd1 = face_dim(expr.left, f.left)
            nd2 = face_dim(expr.right, f.right)
            if nd1 == d1 + 1 and nd2 == d2:
                sigma.append(1)
                c1.append(f.left)
                d1 = nd1
            elif nd2 == d2 + 1 and nd1 == d1:
                sigma.append(2)
                c2.append(f.right)
                d2 = nd2
            else:
                raise ValueError("not a flag over this tree")
    else:
        d1, d2 = n1, n2
        for f in chain:
            nd1 = face_dim(expr.left, f.left)
            nd2 = face_dim(expr.right, f.right)
            if nd1 == d1 - 1 and nd2 == d2:
                sigma.append(1)
                c1.append(f.left)
                d1 = nd1
            elif nd2 == d2 - 1 and nd1 == d1:
                sigma.append(2)
                c2.append(f.right)
                d2 = nd2
            else:
                raise ValueError("not a flag over this tree")
        c1.reverse()
        c2.reverse()
    f1 = Flag(tuple(c1), None, None)
    f2 = Flag(tuple(c2), None, None)
    return f1, f2, tuple(sigma)


# ---------------------------------------------------------------------------
# point assignments and volumes


def centroid_assignment(expr):
    n = dim(expr)
    return {f: centroid(expr, f, n) for f in enumerate_faces(expr)}


def simplex_volume(assignment, flag):
    """|det(z_F^0, ..., z_F^(n-1))| / n!, exact; 0 when degenerate."""
    rows = tuple(assignment[f] for f in flag.faces)
    n = len(rows)
    return abs(det(rows)) / factorial(n)


def volume_function(assignment, expr):
    """Sum of simplex volumes over all flags."""
    n = dim(expr)
    nf = Rat(factorial(n))
    total = RZERO
    for flag in all_flags(expr):
        rows = tuple(assignment[f] for f in flag.faces)
        total += abs(det(rows))
    return total / nf


@dataclass(frozen=True)
class FlagBase:
    """Per-flag determinant data at a base assignment: value and cofactors."""

    flag: object
    base_det: object
    cof: tuple  # cof[k][i] = det with row k replaced by e_i


_centroid_base_cache = {}


def flag_bases(expr, assignment=None):
    """Determinant and cofactor matrix per flag; cached for the centroids."""
    cached = assignment is None
    if cached and expr in _centroid_base_cache:
        return _centroid_base_cache[expr]
    if assignment is None:
        assignment = centroid_assignment(expr)
    out = []
    for flag in all_flags(expr):
        rows = tuple(assignment[f] for f in flag.faces)
        out.append(FlagBase(flag, det(rows), cofactor_matrix(rows)))
    out = tuple(out)
    if cached:
        _centroid_base_cache[expr] = out
    return out


def directional_derivative(base_assignment, z_assignment, expr):
    """Exact derivative of the volume functional at the base along z.

    Requires every flag determinant of the base to be nonzero (the functional
    is then a fixed-sign polynomial near the base and the derivative is the
    cofactor sum  sum_flags sign/n! * sum_k <cof_k, z_F^k>).
    """
    n = dim(expr)
    nf = Rat(factorial(n))
    bases = flag_bases(expr, None if base_assignment is None else base_assignment)
    total = RZERO
    for fb in bases:
        if fb.base_det == 0:
            raise DegenerateBase("flag determinant vanishes at the base assignment")
        s = 1 if fb.base_det > 0 else -1
        acc = RZERO
        for k, face in enumerate(fb.flag.faces):
            z = z_assignment.get(face)
            if z is not None:
                acc += dot(fb.cof[k], z)
        total += s * acc
    return total / nf


def volume_gradient(expr):
    """Per-face gradient of the volume functional at the centroids.

    g[F][i] is the derivative along moving z_F by e_i; the derivative along
    any assignment Z is then  sum_F <g[F], z_F>.
    """
    n = dim(expr)
    nf = Rat(factorial(n))
    grads = {f: list(RZERO for _ in range(n)) for f in enumerate_faces(expr)}
    for fb in flag_bases(expr):
        if fb.base_det == 0:
            raise DegenerateBase("flag determinant vanishes at the centroids")
        s = 1 if fb.base_det > 0 else -1
        for k, face in enumerate(fb.flag.faces):
            g = grads[face]
            row = fb.cof[k]
            if s > 0:
                for i in range(n):
                    g[i] += row[i]
            else:
                for i in range(n):
                    g[i] -= row[i]
    return {f: tuple(x / nf for x in g) for f, g in grads.items()}


# ---------------------------------------------------------------------------
# graded perturbations: every row k of a flag moves by xi_(k+1) * z


def _graded_dets(expr, xi, z, flags=None):
    """(base sign, perturbed det) per flag for rows c_F^k + xi_(k+1) z.

    The perturbation is rank one, so each determinant is
    base + sum_k xi_(k+1) <cof_k, z>; raises if a sign flips (the identity
    under test only holds on the sign-constant cell around the centroids).
    """
    n = dim(expr)
    if len(xi) != n:
        raise ValueError("xi must have one entry per dimension")
    out = []
    for fb in flag_bases(expr):
        if flags is not None and fb.flag not in flags:
            continue
        val = fb.base_det
        for k in range(n):
            if xi[k] != 0:
                val += xi[k] * dot(fb.cof[k], z)
        s = 1 if fb.base_det > 0 else -1
        if val == 0 or (val > 0) != (s > 0):
            raise PerturbationTooLarge("xi too large: a flag determinant changed sign")
        out.append((s, val))
    return out


def graded_volume_check(expr, xi, z):
    """Exact comparison of the volume functional before and after the graded
    perturbation z_F -> c_F + xi_(dim F + 1) z applied to every face."""
    n = dim(expr)
    nf = Rat(factorial(n))
    lhs = RZERO
    for s, val in _graded_dets(expr, xi, z):
        lhs += s * val
    rhs = RZERO
    for fb in flag_bases(expr):
        rhs += abs(fb.base_det)
    return lhs / nf, rhs / nf


def comparable_graded_sum_check(expr, pivot_face, xi, z):
    """Exact comparison of  sum_{flags containing the pivot face} |simplex|
    for the graded perturbation restricted to faces comparable with the
    pivot (inside a flag through the pivot, every face is comparable).

    The direction z must lie in the pivot frame's direction space."""
    from .faces import affine_frame
    from .linalg import affsub_contains, affsub_direction_span

    frame = affine_frame(expr, pivot_face, dim(expr))
    if not affsub_contains(affsub_direction_span(frame.sub), z):
        raise ValueError("z must lie in the pivot frame's direction space")
    flags_through = frozenset(
        fb.flag for fb in flag_bases(expr) if pivot_face in fb.flag.faces
    )
    if not flags_through:
        raise ValueError("pivot face not found in any flag")
    n = dim(expr)
    nf = Rat(factorial(n))
    lhs = RZERO
    for s, val in _graded_dets(expr, xi, z, flags=flags_through):
        lhs += s * val
    rhs = RZERO
    for fb in flag_bases(expr):
        if fb.flag in flags_through:
            rhs += abs(fb.base_det)
    return lhs / nf, rhs / nf


def graded_coefficients(expr, z, pivot_face=None):
    """Symbolic certificate for the graded identities: the coefficient of
    each xi_k in the signed determinant sum.  All-zero coefficients prove the
    identity on the whole sign-constant cell."""
    n = dim(expr)
    coeffs = [RZERO] * n
    for fb in flag_bases(expr):
        if pivot_face is not None and pivot_face not in fb.flag.faces:
            continue
        s = 1 if fb.base_det > 0 else -1
        for k in range(n):
            coeffs[k] += s * dot(fb.cof[k], z)
    return tuple(coeffs)


# ---------------------------------------------------------------------------
# the shuffle-elimination coefficient functions


def shuffle_inverse(sigma, j, ell):
    """Smallest k with sigma_j(k) = ell."""
    count = 0
    for k, s in enumerate(sigma, start=1):
        if s == j:
            count += 1
            if count == ell:
                return k
    raise ValueError("ell exceeds the multiplicity of j in sigma")


def phi(sigma, xi, j, ell):
    """Row-elimination coefficient phi_j(ell); phi_j(0) = 0.

    phi_j(ell) = Phi_j(min{k : sigma_j(k) = ell}) where
    Phi_j(k) = xi_k + sum over l < k with sigma_l != sigma_(l+1) of
    (-1)^(j + sigma_l) xi_l.
    """
    if ell == 0:
        return RZERO
    nj = sum(1 for s in sigma if s == j)
    if not (0 <= ell <= nj):
        raise ValueError(f"ell must lie in 0..{nj}")
    k = shuffle_inverse(sigma, j, ell)
    val = Rat(xi[k - 1])
    for l in range(1, k):
        if sigma[l - 1] != sigma[l]:
            val += (1 if (j + sigma[l - 1]) % 2 == 0 else -1) * Rat(xi[l - 1])
    return val


def elimination_determinant_check(sigma, xi, ps, qs, z):
    """Exact check that the interleaved matrix and its eliminated form have
    equal |det|.

    The first matrix has rows p_(sigma_1(k)) + q_(sigma_2(k)) + xi_k z for
    k = 1..n (with p_0 = q_0 = 0); the second has rows p_l + phi_1(l) z and
    q_l + phi_2(l) z.  Returns (det_M, det_M2, equal).
    """
    n = len(sigma)
    n1 = sum(1 for s in sigma if s == 1)
    n2 = n - n1
    if len(ps) != n1 or len(qs) != n2:
        raise ValueError("vector counts must match the type multiplicities")
    amb = len(z)
    zero = (RZERO,) * amb
    s1 = prefix_counts(sigma, 1)
    s2 = prefix_counts(sigma, 2)
    rows_m = []
    for k in range(1, n + 1):
        p = ps[s1[k] - 1] if s1[k] >= 1 else zero
        q = qs[s2[k] - 1] if s2[k] >= 1 else zero
        rows_m.append(vadd(vadd(p, q), vscale(Rat(xi[k - 1]), z)))
    rows_m2 = []
    for l in range(1, n1 + 1):
        rows_m2.append(vadd(ps[l - 1], vscale(phi(sigma, xi, 1, l), z)))
    for l in range(1, n2 + 1):
        rows_m2.append(vadd(qs[l - 1], vscale(phi(sigma, xi, 2, l), z)))
    d1 = det(tuple(rows_m))
    d2 = det(tuple(rows_m2))
    return d1, d2, abs(d1) == abs(d2)
