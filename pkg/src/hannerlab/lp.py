"""Exact rational linear programming.

A `LinProg` maximizes <objective, x> over free variables x subject to
inequality rows <a_i, x> <= b_i.  The solver is a two-phase tableau simplex
with Bland's anti-cycling rule, run entirely in exact rational arithmetic.
Programs with many rows and few variables (the common shape here: one
inequality per polytope facet) are solved through their duals, which keeps
the tableau small; every outcome is verified against the optimality
certificate before it is returned, so both routes are exact by construction.

`nearest_point` computes the Euclidean-nearest point of (polytope
intersected with affine subspace) to a target: an active-set walk accepted
only with its exact KKT certificate, backed by complete enumeration of
candidate active sets with an equality-constrained least-squares solve per
face.  Distances are compared as exact squared norms; no square roots
appear.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import gcd

from .linalg import (
    RZERO,
    Rat,
    affsub,
    dot,
    is_zero_vec,
    norm2,
    solve,
    vadd,
    vscale,
    vsub,
    zero_vec,
)


class LpError(Exception):
    pass


@dataclass(frozen=True)
class LinProg:
    objective: tuple
    rows: tuple
    rhs: tuple

    def __post_init__(self):
        k = len(self.objective)
        if any(len(r) != k for r in self.rows):
            raise ValueError("constraint dimension mismatch")
        if len(self.rows) != len(self.rhs):
            raise ValueError("rows and rhs length mismatch")


@dataclass(frozen=True)
class LpOutcome:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: object
    witness: tuple
    tight: tuple  # indices of constraints active at the witness
    duals: tuple  # multipliers y >= 0 with sum_i y_i a_i = objective


def linprog(objective, constraints):
    """Build a LinProg from an objective and (vector, bound) pairs."""
    rows = tuple(tuple(Rat(c) for c in a) for a, _ in constraints)
    rhs = tuple(Rat(b) for _, b in constraints)
    return LinProg(tuple(Rat(c) for c in objective), rows, rhs)


# ---------------------------------------------------------------------------
# tableau core: max c.w  s.t.  rows w (<=|=) rhs, w >= 0
#
# The tableau is kept fraction-free: all entries are integers sharing one
# denominator `den` (a basis minor, signed), and each pivot performs the
# Bareiss update  T_ij <- (T_ij * T_rc - T_ic * T_rj) / den  whose division
# is exact.  Rational tableau entries are T_ij / den, so sign tests compare
# against sign(den) and ratio comparisons cross-multiply.  This keeps the
# coefficient arithmetic in plain big integers (no per-operation gcd), which
# matters when constraint data carries hundred-digit rationals.


def _int_rows(rows, rhs):
    out_rows = []
    out_rhs = []
    scales = []
    for row, b in zip(rows, rhs):
        l = 1
        for x in tuple(row) + (b,):
            l = _lcm(l, int(Rat(x).denominator))
        out_rows.append([int(x * l) for x in row])
        out_rhs.append(int(b * l))
        scales.append(l)
    return out_rows, out_rhs, scales


def _lcm(a, b):
    return a // gcd(a, b) * b


try:  # exact quotient without the divisibility re-check; every optimum is
    # certified against the original program afterwards, so a (theoretically
    # impossible) inexact division cannot produce a silently wrong answer
    from gmpy2 import divexact as _divexact
except ImportError:  # pragma: no cover
    def _divexact(a, b):
        return a // b


def _ff_update_row(row, piv, f, prow, den):
    if f == 0:
        if piv == den:
            return
        if den == 1:
            for j in range(len(row)):
                row[j] *= piv
        else:
            for j in range(len(row)):
                row[j] = int(_divexact(row[j] * piv, den))
    elif den == 1:
        for j in range(len(row)):
            row[j] = row[j] * piv - f * prow[j]
    else:
        for j in range(len(row)):
            row[j] = int(_divexact(row[j] * piv - f * prow[j], den))


def _ff_pivot(tab, obj, basis, den, r, col):
    """Bareiss pivot on (r, col): row r is kept verbatim and every other row
    (and the objective row) moves to the new common denominator tab[r][col]."""
    piv = tab[r][col]
    prow = tab[r]
    _ff_update_row(obj, piv, obj[col], prow, den)
    for i in range(len(tab)):
        if i != r:
            _ff_update_row(tab[i], piv, tab[i][col], prow, den)
    basis[r] = col
    return piv


def _ff_run(tab, obj, basis, allowed, den):
    """Bland-rule iterations on the fraction-free tableau.

    Rational entries are T/den; den may carry either sign, so positivity
    tests compare against sign(den) and ratio tests cross-multiply (the two
    denominators always share the rational sign, so the product is
    positive)."""
    ncols = len(obj) - 1
    while True:
        if den > 0:
            col = next((j for j in range(ncols) if allowed[j] and obj[j] > 0), None)
        else:
            col = next((j for j in range(ncols) if allowed[j] and obj[j] < 0), None)
        if col is None:
            return "optimal", den
        best = None
        for i, row in enumerate(tab):
            a = row[col]
            if (a > 0) if den > 0 else (a < 0):
                if best is None:
                    best = (row[-1], a, i)
                else:
                    lhs = row[-1] * best[1]
                    rhs = best[0] * a
                    if lhs < rhs or (lhs == rhs and basis[i] < basis[best[2]]):
                        best = (row[-1], a, i)
        if best is None:
            return "unbounded", den
        den = _ff_pivot(tab, obj, basis, den, best[2], col)


def _ff_costs(tab, basis, costs, den):
    # integer reduced-cost row: den * c_j - sum_i c_basis(i) T_ij, with the
    # last slot holding minus den times the objective value
    width = len(tab[0]) if tab else len(costs) + 1
    obj = [den * cj for cj in costs] + [0]
    for i, b in enumerate(basis):
        cb = costs[b]
        if cb != 0:
            row = tab[i]
            for j in range(width):
                obj[j] -= cb * row[j]
    return obj


def _standard_simplex(c, rows, rhs, types):
    """Solve max c.w s.t. rows w (types) rhs, w >= 0 exactly.

    types[i] is "<=" or "==".  Returns (status, w, duals_per_row).
    """
    m = len(rows)
    nstruct = len(c)
    rows, rhs, row_scale = _int_rows(rows, rhs)
    c_l = 1
    for x in c:
        c_l = _lcm(c_l, int(Rat(x).denominator))
    c_int = [int(x * c_l) for x in c]

    flip = [False] * m
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-x for x in rows[i]]
            rhs[i] = -rhs[i]
            flip[i] = True
            if types[i] == "<=":
                types = types[:i] + (">=",) + types[i + 1 :]
    # column layout: structural | one slack/surplus per inequality | artificials
    slack_col = {}
    art_col = {}
    ncols = nstruct
    for i in range(m):
        if types[i] in ("<=", ">="):
            slack_col[i] = ncols
            ncols += 1
    for i in range(m):
        if types[i] in (">=", "=="):
            art_col[i] = ncols
            ncols += 1
    tab = []
    basis = []
    for i in range(m):
        row = rows[i] + [0] * (ncols - nstruct) + [rhs[i]]
        if i in slack_col:
            row[slack_col[i]] = 1 if types[i] == "<=" else -1
        if i in art_col:
            row[art_col[i]] = 1
            basis.append(art_col[i])
        else:
            basis.append(slack_col[i])
        tab.append(row)
    den = 1

    allowed = [True] * ncols
    if art_col:
        phase1 = [0] * ncols
        for col in art_col.values():
            phase1[col] = -1
        obj = _ff_costs(tab, basis, phase1, den)
        status, den = _ff_run(tab, obj, basis, allowed, den)
        if status != "optimal" or obj[-1] != 0:
            return "infeasible", None, None
        art_cols = set(art_col.values())
        for col in art_cols:
            allowed[col] = False
        # pivot leftover artificials out of the basis when possible
        for i in range(m):
            if basis[i] in art_cols:
                col = next((j for j in range(ncols) if allowed[j] and tab[i][j] != 0), None)
                if col is not None:
                    den = _ff_pivot(tab, obj, basis, den, i, col)

    costs = c_int + [0] * (ncols - nstruct)
    obj = _ff_costs(tab, basis, costs, den)
    status, den = _ff_run(tab, obj, basis, allowed, den)
    if status == "unbounded":
        return "unbounded", None, None
    w = [RZERO] * ncols
    for i, b in enumerate(basis):
        w[b] = Rat(tab[i][-1], den)
    duals = []
    for i in range(m):
        if types[i] == "<=":
            y = Rat(-obj[slack_col[i]], den)
        elif types[i] == ">=":
            y = Rat(obj[slack_col[i]], den)
        else:
            y = Rat(-obj[art_col[i]], den)
        if flip[i]:
            y = -y
        # undo the row/objective integer scalings
        duals.append(y * row_scale[i] / c_l)
    return "optimal", tuple(w[:nstruct]), tuple(duals)


# ---------------------------------------------------------------------------
# public solver for free-variable programs


def _certify(p, x, y, tol_name):
    """Exact optimality certificate: feasibility, dual feasibility,
    matching objective values.  Any violation is an internal error."""
    val = dot(p.objective, x)
    for a, b in zip(p.rows, p.rhs):
        if dot(a, x) > b:
            raise LpError(f"{tol_name}: witness infeasible")
    k = len(p.objective)
    combo = [RZERO] * k
    for yi, a in zip(y, p.rows):
        if yi < 0:
            raise LpError(f"{tol_name}: negative dual")
        if yi != 0:
            combo = [s + yi * ai for s, ai in zip(combo, a)]
    if tuple(combo) != tuple(p.objective):
        raise LpError(f"{tol_name}: dual constraint violated")
    dual_val = RZERO
    for yi, b in zip(y, p.rhs):
        dual_val += yi * b
    if dual_val != val:
        raise LpError(f"{tol_name}: duality gap")
    return val


def _primitive_int_row(row, b):
    """Scale (row, b) to coprime integers; the constraint is unchanged."""
    l = 1
    for x in tuple(row) + (b,):
        d = int(Rat(x).denominator)
        l = l // gcd(l, d) * d
    ints = [int(x * l) for x in row] + [int(b * l)]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(Rat(v) for v in ints[:-1]), Rat(ints[-1]), Rat(l, g if g > 1 else 1)


def _normalize_program(p):
    """Equivalent program with coprime integer rows and integer objective.

    Keeping every coefficient an integer before any transposition matters:
    the dual route mixes coordinates of all rows into single columns, and
    clearing denominators only at that point would blow the entries up."""
    rows = []
    rhs = []
    row_scale = []
    for a, b in zip(p.rows, p.rhs):
        ra, rb, s = _primitive_int_row(a, b)
        rows.append(ra)
        rhs.append(rb)
        row_scale.append(s)
    obj, _, obj_scale = _primitive_int_row(p.objective, RZERO)
    q = LinProg(obj, tuple(rows), tuple(rhs))
    return q, tuple(row_scale), obj_scale


def maximize(p):
    """Exact optimum of a free-variable program with inequality constraints."""
    k = len(p.objective)
    m = len(p.rows)
    q, row_scale, obj_scale = _normalize_program(p)
    tall = m >= max(12, 3 * k) and all(b >= 0 for b in q.rhs)
    if tall:
        outcome = _maximize_dual(q)
    else:
        outcome = _maximize_direct(q)
    if outcome.status != "optimal":
        return outcome
    x = outcome.witness
    duals = tuple(y * s / obj_scale for y, s in zip(outcome.duals, row_scale))
    out = LpOutcome("optimal", dot(p.objective, x), x, _tight_set(p, x), duals)
    _certify(p, out.witness, out.duals, "lp")
    return out


def _tight_set(p, x):
    return tuple(i for i, (a, b) in enumerate(zip(p.rows, p.rhs)) if dot(a, x) == b)


def _maximize_direct(p):
    k = len(p.objective)
    c = tuple(p.objective) + tuple(-ci for ci in p.objective)
    rows = [tuple(a) + tuple(-ai for ai in a) for a in p.rows]
    types = ("<=",) * len(rows)
    status, w, duals = _standard_simplex(c, rows, p.rhs, types)
    if status != "optimal":
        return LpOutcome(status, None, None, (), ())
    x = tuple(w[i] - w[k + i] for i in range(k))
    return LpOutcome("optimal", dot(p.objective, x), x, _tight_set(p, x), duals)


def _maximize_dual(p):
    # dual of (max c.x : A x <= b) is (min b.y : A^T y = c, y >= 0); since
    # b >= 0 the primal is feasible at x = 0, so dual infeasibility means the
    # primal is unbounded.  The primal witness is recovered from the duals of
    # the equality rows.
    k = len(p.objective)
    m = len(p.rows)
    at_rows = tuple(tuple(p.rows[i][j] for i in range(m)) for j in range(k))
    c = tuple(-b for b in p.rhs)
    status, y, eq_duals = _standard_simplex(c, at_rows, p.objective, ("==",) * k)
    if status == "infeasible":
        return LpOutcome("unbounded", None, None, (), ())
    if status != "optimal":
        raise LpError("dual of a feasible bounded program cannot be unbounded")
    x = tuple(-u for u in eq_duals)
    return LpOutcome("optimal", dot(p.objective, x), x, _tight_set(p, x), tuple(y))


def feasible(rows, rhs):
    """Exact feasibility test of {x : rows x <= rhs}."""
    if not rows:
        return True
    k = len(rows[0])
    p = LinProg(zero_vec(k), tuple(rows), tuple(rhs))
    return maximize(p).status == "optimal"


# ---------------------------------------------------------------------------
# nearest point of (region ∩ affine subspace) to a target


def _gram_project(dirs, w):
    """Coefficients mu minimizing |w - sum mu_j d_j|^2 (normal equations)."""
    g = tuple(tuple(dot(di, dj) for dj in dirs) for di in dirs)
    rhs = tuple(dot(d, w) for d in dirs)
    return solve_pd(g, rhs)


def solve_pd(g, rhs):
    res = solve(g, rhs)
    if res.status != "unique":
        raise LpError("gram matrix should be positive definite")
    return res.particular


def _constrained_lsq(dirs, w, a_rows, a_rhs):
    """argmin |w - D mu|^2 s.t. a_rows mu = a_rhs; None if inconsistent.

    Returns (mu, multipliers): on a nonempty affine slice the strictly convex
    objective has a unique minimizer, so the mu-part of any solution of the
    stationarity system is that minimizer.  The multipliers are one valid
    choice (non-unique when the active rows are dependent)."""
    d = len(dirs)
    s = len(a_rows)
    g = [[RZERO] * (d + s) for _ in range(d + s)]
    for i in range(d):
        for j in range(d):
            g[i][j] = dot(dirs[i], dirs[j])
        for j in range(s):
            g[i][d + j] = a_rows[j][i]
    for i in range(s):
        for j in range(d):
            g[d + i][j] = a_rows[i][j]
    rhs = [dot(di, w) for di in dirs] + list(a_rhs)
    res = solve(tuple(tuple(r) for r in g), tuple(rhs))
    if res.status == "inconsistent":
        return None, None
    return res.particular[:d], res.particular[d:]


def nearest_point(target, region, onto, anchor=None):
    """Euclidean-nearest point of {x in onto : region rows hold} to target.

    `region` is a sequence of (vector, bound) inequality pairs and `onto` an
    AffSub.  The intersection must be nonempty.  The projection onto the
    affine hull is tried first; otherwise an active-set walk (accepted only
    with its exact KKT certificate) and, failing that, complete active-set
    enumeration find the unique minimizer.  A feasible `anchor` point in
    `onto` re-bases the slice so the reduced system has nonnegative slack.
    """
    rows = tuple(tuple(Rat(c) for c in a) for a, _ in region)
    rhs = tuple(Rat(b) for _, b in region)
    target = tuple(Rat(c) for c in target)
    p0 = onto.point if anchor is None else tuple(Rat(c) for c in anchor)
    # directions scaled to coprime integers: same span, smaller arithmetic
    dirs = tuple(_primitive_int_row(d, RZERO)[0] for d in onto.dirs)

    def lift(mu):
        x = p0
        for m, d in zip(mu, dirs):
            x = vadd(x, vscale(m, d))
        return x

    def feas(x):
        return all(dot(a, x) <= b for a, b in zip(rows, rhs))

    if not dirs:
        if not feas(p0):
            raise LpError("region does not meet the affine subspace")
        return p0

    w = vsub(target, p0)
    mu0 = _gram_project(dirs, w)
    x0 = lift(mu0)
    if feas(x0):
        return x0

    # reduced inequality system on the slice
    g_rows = tuple(tuple(dot(a, d) for d in dirs) for a in rows)
    g_rhs = tuple(b - dot(a, p0) for a, b in zip(rows, rhs))

    origin = zero_vec(len(dirs))
    if all(h >= 0 for h in g_rhs):
        mu = _active_set_walk(dirs, w, g_rows, g_rhs, origin)
        if mu is not None:
            return lift(mu)
    return lift(_projection_by_enumeration(dirs, w, g_rows, g_rhs))


def _active_set_walk(dirs, w, g_rows, g_rhs, start, max_iters=None):
    """Primal active-set iteration for the slice projection.

    `start` must be feasible; iterates stay feasible, stepping toward the
    working-set minimizer and stopping at the first blocking row (lowest
    index on ties).  A returned point carries its exact KKT certificate
    (feasibility, stationarity, nonnegative multipliers), hence is the global
    minimizer of the strictly convex objective; cycling or the iteration cap
    returns None and the caller falls back to complete enumeration.
    """
    m = len(g_rows)
    if max_iters is None:
        max_iters = 8 * (m + len(dirs) + 2)
    x = tuple(start)
    active = [r for r in range(m) if dot(g_rows[r], x) == g_rhs[r]]
    seen = set()
    for _ in range(max_iters):
        key = tuple(active)
        a_rows = tuple(g_rows[r] for r in active)
        a_rhs = tuple(g_rhs[r] for r in active)
        mu, lam = _constrained_lsq(dirs, w, a_rows, a_rhs)
        if mu is None:
            return None
        if mu == x:
            if key in seen:
                return None
            seen.add(key)
            neg = next((i for i, l in enumerate(lam) if l < 0), None)
            if neg is None:
                if all(dot(g, x) <= h for g, h in zip(g_rows, g_rhs)):
                    return x
                return None
            active.pop(neg)
            continue
        step = vsub(mu, x)
        alpha = None
        blocker = None
        for r in range(m):
            if r in active:
                continue
            adv = dot(g_rows[r], step)
            if adv > 0:
                slack = g_rhs[r] - dot(g_rows[r], x)
                bound = slack / adv
                if alpha is None or bound < alpha:
                    alpha = bound
                    blocker = r
        if alpha is None or alpha >= 1:
            x = mu
        else:
            if alpha > 0:
                x = vadd(x, vscale(alpha, step))
            active.append(blocker)
            active.sort()
    return None


def _projection_by_enumeration(dirs, w, g_rows, g_rhs):
    """Complete fallback: enumerate active sets over rows that can be tight
    somewhere on the feasible slice."""
    if not feasible(g_rows, g_rhs):
        raise LpError("region does not meet the affine subspace")
    capable = []
    for r in range(len(g_rows)):
        if is_zero_vec(g_rows[r]):
            continue
        out = maximize(LinProg(g_rows[r], g_rows, g_rhs))
        if out.status == "unbounded" or out.value == g_rhs[r]:
            capable.append(r)
    if len(capable) > 18:
        raise LpError("active-set enumeration too large; region too degenerate")
    best = None
    for size in range(1, len(capable) + 1):
        for subset in combinations(capable, size):
            a_rows = tuple(g_rows[r] for r in subset)
            a_rhs = tuple(g_rhs[r] for r in subset)
            mu, _ = _constrained_lsq(dirs, w, a_rows, a_rhs)
            if mu is None:
                continue
            if not all(dot(gr, mu) <= gb for gr, gb in zip(g_rows, g_rhs)):
                continue
            d2 = norm2(vsub(w, _combine(dirs, mu)))
            if best is None or d2 < best[0]:
                best = (d2, mu)
    if best is None:
        raise LpError("no feasible face found; inconsistent region")
    return best[1]


def _combine(dirs, mu):
    x = zero_vec(len(dirs[0]))
    for m, d in zip(mu, dirs):
        x = vadd(x, vscale(m, d))
    return x


def tangency_subspace(point, dirs, eq_rows, eq_rhs):
    """Restrict the affine subspace point+span(dirs) by equalities <a,x>=b.

    Returns the restricted AffSub, or None when the equalities cut the
    subspace to the empty set.
    """
    if not dirs:
        ok = all(dot(a, point) == b for a, b in zip(eq_rows, eq_rhs))
        return affsub(point, ()) if ok else None
    m = tuple(tuple(dot(a, d) for d in dirs) for a in eq_rows)
    rhs = tuple(b - dot(a, point) for a, b in zip(eq_rows, eq_rhs))
    res = solve(m, rhs)
    if res.status == "inconsistent":
        return None
    base = point
    for c, d in zip(res.particular, dirs):
        base = vadd(base, vscale(c, d))
    new_dirs = []
    for nu in res.nullspace:
        v = zero_vec(len(point))
        for c, d in zip(nu, dirs):
            v = vadd(v, vscale(c, d))
        if not is_zero_vec(v):
            new_dirs.append(v)
    return affsub(base, new_dirs)
