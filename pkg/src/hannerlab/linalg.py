"""Exact rational linear algebra: vectors, matrices, determinants, linear
solving, and affine subspaces.

Every quantity in this package is an exact rational number.  Scalars are
`gmpy2.mpq` when gmpy2 is importable (much faster) and `fractions.Fraction`
otherwise; both are arbitrary precision, canonically reduced, and carry a
positive denominator.  Vectors are plain tuples of rationals and matrices are
tuples of row vectors, following the convention that rows of a matrix are the
vectors of interest (determinants are taken of row lists).

No floating point is used anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

try:
    from gmpy2 import mpq as Rat
except ImportError:  # pragma: no cover - gmpy2 is optional
    from fractions import Fraction as Rat

RZERO = Rat(0)
RONE = Rat(1)


def rat(num, den=1):
    """Build an exact rational from integers or a "p/q" string."""
    return Rat(num, den) if den != 1 else Rat(num)


def rat_str(x):
    """Render a rational as "p/q" (or "p" when the denominator is 1)."""
    return str(x)


def parse_rat(text):
    """Parse "p/q" or "p" into an exact rational."""
    text = text.strip()
    if "/" in text:
        p, q = text.split("/")
        return Rat(int(p), int(q))
    return Rat(int(text))


# ---------------------------------------------------------------------------
# vectors


def vec(*coords):
    return tuple(Rat(c) for c in coords)


def zero_vec(n):
    return (RZERO,) * n


def basis_vec(n, i):
    """Standard basis vector e_i (0-based index)."""
    return tuple(RONE if j == i else RZERO for j in range(n))


def vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vsub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vneg(u):
    return tuple(-a for a in u)


def vscale(c, u):
    return tuple(c * a for a in u)


def dot(u, v):
    if len(u) != len(v):
        raise ValueError("dimension mismatch in dot product")
    s = RZERO
    for a, b in zip(u, v):
        s += a * b
    return s


def norm2(u):
    """Squared Euclidean norm, exact."""
    return dot(u, u)


def is_zero_vec(u):
    return all(a == 0 for a in u)


# ---------------------------------------------------------------------------
# matrices (tuples of row vectors)


def mat(rows):
    rows = tuple(tuple(Rat(c) for c in row) for row in rows)
    if rows:
        w = len(rows[0])
        if any(len(r) != w for r in rows):
            raise ValueError("ragged matrix")
    return rows


def identity(n):
    return tuple(basis_vec(n, i) for i in range(n))


def mat_vec(m, v):
    return tuple(dot(row, v) for row in m)


def mat_mul(a, b):
    bt = transpose(b)
    return tuple(tuple(dot(ra, cb) for cb in bt) for ra in a)


def transpose(m):
    return tuple(zip(*m)) if m else ()


def _lcm(a, b):
    return a // gcd(a, b) * b


def det(m):
    """Exact determinant via fraction-free (Bareiss) elimination.

    Row denominators are cleared first so the elimination runs over plain
    integers with exact divisions; the cleared factor is divided back out at
    the end.  Raises on non-square input.
    """
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return RONE
    scale = 1
    rows = []
    for row in m:
        l = 1
        for x in row:
            l = _lcm(l, int(Rat(x).denominator))
        scale *= l
        rows.append([int(x * l) for x in row])
    sign = 1
    prev = 1
    for k in range(n - 1):
        if rows[k][k] == 0:
            for r in range(k + 1, n):
                if rows[r][k] != 0:
                    rows[k], rows[r] = rows[r], rows[k]
                    sign = -sign
                    break
            else:
                return RZERO
        pivot = rows[k][k]
        for i in range(k + 1, n):
            ri, rk = rows[i], rows[k]
            f = ri[k]
            for j in range(k + 1, n):
                ri[j] = (ri[j] * pivot - f * rk[j]) // prev
            ri[k] = 0
        prev = pivot
    return Rat(sign * rows[n - 1][n - 1], scale)


def cofactor_matrix(m):
    """Matrix of cofactors: entry (i, j) is det of m with row i replaced by e_j.

    Equivalently the classical cofactor (-1)^(i+j) times the (i, j) minor, so
    det(m with row i replaced by z) == sum_j z_j * cof[i][j].
    """
    n = len(m)
    if n == 1:
        return ((RONE,),)
    cof = []
    for i in range(n):
        sub_rows = [m[r] for r in range(n) if r != i]
        row = []
        for j in range(n):
            minor = [tuple(x for c, x in enumerate(r) if c != j) for r in sub_rows]
            s = -1 if (i + j) % 2 else 1
            row.append(s * det(minor))
        cof.append(tuple(row))
    return tuple(cof)


def det_replace_rows(base_det, cof, coeffs, z):
    """det of a matrix after adding coeffs[k] * z to each row k.

    The perturbation has rank one (every added row is parallel to z), so the
    determinant is affine in the coefficients:
    det(M + coeffs^T z) = det(M) + sum_k coeffs[k] * <cof[k], z>.
    """
    d = base_det
    for k, c in enumerate(coeffs):
        if c != 0:
            d += c * dot(cof[k], z)
    return d


# ---------------------------------------------------------------------------
# reduced row echelon form, solving, kernels


def rref(m):
    """Reduced row echelon form.  Returns (rows, pivot_columns)."""
    rows = [list(r) for r in m]
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if rows[i][c] != 0:
                pr = i
                break
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return tuple(tuple(row) for row in rows[:r]), tuple(pivots)


def rank(m):
    if not m:
        return 0
    return len(rref(m)[0])


@dataclass(frozen=True)
class SolveResult:
    """Exact description of the solution set of a linear system."""

    status: str  # "unique" | "underdetermined" | "inconsistent"
    particular: tuple | None
    nullspace: tuple  # basis vectors of the homogeneous solution space


def solve(m, b):
    """Solve m x = b exactly, describing the full solution set."""
    if len(m) != len(b):
        raise ValueError("row count of m must match len(b)")
    ncols = len(m[0]) if m else 0
    aug = [tuple(row) + (bi,) for row, bi in zip(m, b)]
    red, pivots = rref(aug) if aug else ((), ())
    if ncols in pivots:
        return SolveResult("inconsistent", None, ())
    part = [RZERO] * ncols
    for row, c in zip(red, pivots):
        part[c] = row[ncols]
    null = kernel(tuple(row[:ncols] for row in red)) if m else \
        tuple(basis_vec(ncols, i) for i in range(ncols))
    status = "unique" if not null else "underdetermined"
    return SolveResult(status, tuple(part), null)


def solve_unique(m, b):
    """Solve m x = b expecting a unique solution; raises otherwise."""
    res = solve(m, b)
    if res.status != "unique":
        raise ValueError(f"system is {res.status}")
    return res.particular


def kernel(rows):
    """Basis of the null space {x : rows @ x = 0}, in RREF order."""
    if not rows:
        return ()
    ncols = len(rows[0])
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [RZERO] * ncols
        v[f] = RONE
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return tuple(basis)


def orth_complement(vs):
    """Basis of the orthogonal complement of span(vs).

    The complement of nothing is the full space, so the caller must supply at
    least one vector or use `kernel` with an explicit column count.
    """
    vs = tuple(vs)
    if not vs:
        raise ValueError("orth_complement of an empty family needs a dimension; "
                         "use orth_complement_dim")
    return kernel(vs)


def orth_complement_dim(vs, n):
    vs = tuple(vs)
    if not vs:
        return tuple(basis_vec(n, i) for i in range(n))
    if any(len(v) != n for v in vs):
        raise ValueError("dimension mismatch")
    return kernel(vs)


def span_intersection(us, vs, n):
    """Basis of span(us) & span(vs) inside R^n."""
    us, vs = tuple(us), tuple(vs)
    if not us or not vs:
        return ()
    # x in both spans: x = U^T a = V^T b. Solve [U^T | -V^T] (a, b) = 0.
    rows = []
    for i in range(n):
        rows.append(tuple(u[i] for u in us) + tuple(-v[i] for v in vs))
    combs = kernel(tuple(rows))
    basis = []
    for comb in combs:
        x = zero_vec(n)
        for a, u in zip(comb[: len(us)], us):
            x = vadd(x, vscale(a, u))
        if not is_zero_vec(x):
            basis.append(x)
    red, _ = rref(tuple(basis)) if basis else ((), ())
    return tuple(r for r in red if not is_zero_vec(r))


# ---------------------------------------------------------------------------
# affine subspaces


@dataclass(frozen=True)
class AffSub:
    """Affine subspace `point + span(dirs)` with a canonical reduced basis.

    `dirs` is kept in reduced row echelon form and `point` is reduced modulo
    the direction space (its pivot coordinates are zeroed), so two AffSub
    values are equal as sets iff they are equal as dataclasses.
    """

    point: tuple
    dirs: tuple

    @property
    def n(self):
        return len(self.point)

    @property
    def dim(self):
        return len(self.dirs)


def affsub(point, dirs=()):
    """Canonicalize and build an affine subspace from a point and spanning set."""
    point = tuple(Rat(c) for c in point)
    dirs = tuple(tuple(Rat(c) for c in d) for d in dirs)
    if any(len(d) != len(point) for d in dirs):
        raise ValueError("direction dimension mismatch")
    red, pivots = rref(dirs) if dirs else ((), ())
    red = tuple(r for r in red if not is_zero_vec(r))
    p = list(point)
    for row, c in zip(red, pivots):
        f = p[c]
        if f != 0:
            for j in range(len(p)):
                p[j] -= f * row[j]
    return AffSub(tuple(p), red)


def affsub_contains(a, x):
    """Exact membership test x in a."""
    if len(x) != a.n:
        raise ValueError("dimension mismatch")
    d = vsub(x, a.point)
    if not a.dirs:
        return is_zero_vec(d)
    cols = tuple(zip(*a.dirs))
    res = solve(cols, d)
    return res.status != "inconsistent"


def affsub_sum(a, b):
    """Minkowski sum {p + q : p in a, q in b}."""
    if a.n != b.n:
        raise ValueError("ambient dimension mismatch")
    return affsub(vadd(a.point, b.point), a.dirs + b.dirs)


def affsub_scale(lam, a):
    """Dilate from the origin: {lam * p : p in a}."""
    lam = Rat(lam)
    if lam == 0:
        raise ValueError("zero weight collapses the subspace")
    return affsub(vscale(lam, a.point), a.dirs)


def affsub_combination(alpha, a, beta, b):
    """Weighted pointwise combination {alpha*p + beta*q : p in a, q in b}."""
    alpha, beta = Rat(alpha), Rat(beta)
    if alpha == 0 or beta == 0:
        raise ValueError("zero weight produces a degenerate combination")
    if a.n != b.n:
        raise ValueError("ambient dimension mismatch")
    point = vadd(vscale(alpha, a.point), vscale(beta, b.point))
    return affsub(point, a.dirs + b.dirs)


def affsub_direction_span(a):
    """The direction space a - a as a linear AffSub through the origin."""
    return AffSub(zero_vec(a.n), a.dirs)
