"""Hanner polytopes as binary l1/linf expression trees, and their graphs.

A Hanner polytope is built from symmetric coordinate intervals [-e_j, e_j] by
repeatedly taking l1 sums (convex hulls of unions) or linf sums (Minkowski
sums) of blocks living on disjoint coordinate sets.  The expression tree is
the generator for everything else in this package.

Each standard Hanner polytope H corresponds to a simple graph on its
coordinates: i ~ j exactly when e_i + e_j lies outside H, which happens
exactly when the lowest common ancestor of leaves i and j is an l1 node.
These graphs are precisely the P4-free graphs (no induced path on four
vertices); `hanner_of_graph` inverts the correspondence by the usual
complement-reducible decomposition.  Vertices of H are the sign patterns
over maximal independent sets, vertices of the polar over maximal cliques,
and every vertex/polar-vertex pair has inner product -1, 0 or 1 with
absolute value exactly 1 (the CL property).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations, product

from .linalg import RONE, RZERO, vadd, zero_vec

L1 = "l1"
LINF = "linf"


@dataclass(frozen=True)
class Leaf:
    index: int  # 1-based coordinate index


@dataclass(frozen=True)
class Node:
    op: str  # L1 | LINF
    left: object
    right: object


class ParseError(ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def leaf_indices(expr):
    """Coordinate indices of the leaves, in tree order (1-based)."""
    if isinstance(expr, Leaf):
        return (expr.index,)
    return leaf_indices(expr.left) + leaf_indices(expr.right)


def dim(expr):
    return len(leaf_indices(expr))


_TOKEN = re.compile(r"\s*(\(|\)|\+1|\+inf|I\d+)")


def parse_expr(text):
    """Parse the grammar  H ::= I<k> | "(" H "+1" H ")" | "(" H "+inf" H ")".

    Leaf indices must form a permutation of 1..n; syntax errors carry the
    offending position.
    """
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ParseError(f"unexpected character {text[pos]!r}", pos)
            break
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()

    def parse_node(i):
        if i >= len(tokens):
            raise ParseError("unexpected end of input", len(text))
        tok, at = tokens[i]
        if tok.startswith("I"):
            return Leaf(int(tok[1:])), i + 1
        if tok != "(":
            raise ParseError(f"expected '(' or leaf, got {tok!r}", at)
        left, i = parse_node(i + 1)
        if i >= len(tokens) or tokens[i][0] not in ("+1", "+inf"):
            at = tokens[i][1] if i < len(tokens) else len(text)
            raise ParseError("expected '+1' or '+inf'", at)
        op = L1 if tokens[i][0] == "+1" else LINF
        right, i = parse_node(i + 1)
        if i >= len(tokens) or tokens[i][0] != ")":
            at = tokens[i][1] if i < len(tokens) else len(text)
            raise ParseError("expected ')'", at)
        return Node(op, left, right), i + 1

    expr, i = parse_node(0)
    if i != len(tokens):
        raise ParseError(f"trailing input {tokens[i][0]!r}", tokens[i][1])
    idx = leaf_indices(expr)
    seen = set()
    for j in idx:
        if j in seen:
            raise ParseError(f"duplicate coordinate index I{j}", 0)
        seen.add(j)
    if seen != set(range(1, len(idx) + 1)):
        missing = sorted(set(range(1, len(idx) + 1)) - seen)
        raise ParseError(f"coordinate indices must be 1..n; missing {missing}", 0)
    return expr


def format_expr(expr):
    if isinstance(expr, Leaf):
        return f"I{expr.index}"
    op = "+1" if expr.op == L1 else "+inf"
    return f"({format_expr(expr.left)} {op} {format_expr(expr.right)})"


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset  # of 2-element frozensets over 1..n

    def adjacent(self, i, j):
        return frozenset((i, j)) in self.edges


def graph(n, edge_pairs):
    edges = set()
    for i, j in edge_pairs:
        if i == j or not (1 <= i <= n and 1 <= j <= n):
            raise ValueError(f"bad edge ({i},{j})")
        edges.add(frozenset((i, j)))
    return Graph(n, frozenset(edges))


def graph_to_json(g):
    pairs = sorted(tuple(sorted(e)) for e in g.edges)
    return {"n": g.n, "edges": [list(p) for p in pairs]}


def graph_from_json(data):
    return graph(int(data["n"]), [tuple(e) for e in data["edges"]])


def graph_of(expr):
    """Graph with i ~ j iff the lowest common ancestor of i, j is an l1 node."""
    edges = []

    def walk(e):
        if isinstance(e, Leaf):
            return
        walk(e.left)
        walk(e.right)
        if e.op == L1:
            for i in leaf_indices(e.left):
                for j in leaf_indices(e.right):
                    edges.append((i, j))

    walk(expr)
    return graph(dim(expr), edges)


def complement(g):
    edges = [
        (i, j)
        for i, j in combinations(range(1, g.n + 1), 2)
        if not g.adjacent(i, j)
    ]
    return graph(g.n, edges)


def _components(g, verts):
    verts = sorted(verts)
    remaining = set(verts)
    comps = []
    while remaining:
        start = min(remaining)
        comp = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in list(remaining):
                if w not in comp and g.adjacent(v, w):
                    comp.add(w)
                    stack.append(w)
        remaining -= comp
        comps.append(sorted(comp))
    return comps


def find_induced_p4(g):
    """An induced 4-vertex path (a,b,c,d) of g, or None."""
    verts = range(1, g.n + 1)
    for quad in combinations(verts, 4):
        for perm in _p4_orders(quad):
            a, b, c, d = perm
            if (
                g.adjacent(a, b)
                and g.adjacent(b, c)
                and g.adjacent(c, d)
                and not g.adjacent(a, c)
                and not g.adjacent(a, d)
                and not g.adjacent(b, d)
            ):
                return perm
    return None


def _p4_orders(quad):
    a, b, c, d = quad
    # 12 orderings up to reversal cover all labelings of a path
    return [
        (a, b, c, d), (a, b, d, c), (a, c, b, d), (a, c, d, b),
        (a, d, b, c), (a, d, c, b), (b, a, c, d), (b, a, d, c),
        (b, c, a, d), (b, d, a, c), (c, a, b, d), (c, b, a, d),
    ]


class NotCographError(ValueError):
    """Raised when a graph is not P4-free; carries an induced path witness."""

    def __init__(self, witness):
        super().__init__(f"graph contains an induced 4-path {witness}")
        self.witness = witness


def hanner_of_graph(g):
    """Expression tree whose graph is g, via cograph decomposition.

    Disconnected graphs split into linf sums over components; graphs with a
    disconnected complement split into l1 sums over co-components.  A graph
    where both fail on >= 2 vertices contains an induced 4-path, which is
    reported as a witness.
    """

    def build(verts):
        if len(verts) == 1:
            return Leaf(verts[0])
        comps = _components(g, verts)
        if len(comps) > 1:
            return _fold(LINF, [build(c) for c in comps])
        co = complement(g)
        cocomps = _components(co, verts)
        if len(cocomps) > 1:
            return _fold(L1, [build(c) for c in cocomps])
        sub = graph(g.n, [
            (i, j) for i, j in combinations(sorted(verts), 2) if g.adjacent(i, j)
        ])
        # restrict the witness search to the stuck vertex set
        witness = None
        for quad in combinations(sorted(verts), 4):
            gg = graph(g.n, [(i, j) for i, j in combinations(quad, 2) if sub.adjacent(i, j)])
            witness = find_induced_p4_on(gg, quad)
            if witness:
                break
        raise NotCographError(witness)

    return build(sorted(range(1, g.n + 1)))


def find_induced_p4_on(g, quad):
    for perm in _p4_orders(quad):
        a, b, c, d = perm
        if (
            g.adjacent(a, b)
            and g.adjacent(b, c)
            and g.adjacent(c, d)
            and not g.adjacent(a, c)
            and not g.adjacent(a, d)
            and not g.adjacent(b, d)
        ):
            return perm
    return None


def _fold(op, children):
    children = sorted(children, key=lambda e: min(leaf_indices(e)))
    out = children[0]
    for child in children[1:]:
        out = Node(op, out, child)
    return out


def canonical_form(expr):
    """Canonical tree: same-op runs flattened, children ordered by smallest
    leaf index, then refolded left-to-right."""

    def flatten(e, op):
        if isinstance(e, Node) and e.op == op:
            return flatten(e.left, op) + flatten(e.right, op)
        return [canonical_form(e)]

    if isinstance(expr, Leaf):
        return expr
    return _fold(expr.op, flatten(expr.left, expr.op) + flatten(expr.right, expr.op))


def structure_key(expr):
    """Shape of the tree ignoring leaf labels: used to deduplicate Hanner
    polytope types per dimension."""
    if isinstance(expr, Leaf):
        return ("leaf",)

    def flatten(e, op):
        if isinstance(e, Node) and e.op == op:
            return flatten(e.left, op) + flatten(e.right, op)
        return [structure_key(e)]

    parts = sorted(flatten(expr.left, expr.op) + flatten(expr.right, expr.op))
    return (expr.op,) + tuple(parts)


def canonical_trees(n):
    """One canonical expression tree per Hanner polytope type in dimension n.

    Types are counted up to coordinate relabeling (a shape is a root label
    plus a multiset of lower-dimensional shapes whose own roots differ from
    it); the counts per dimension are 1, 2, 4, 10, 24, 66, ...
    """
    all_shapes = {1: [("leaf",)]}
    for m in range(2, n + 1):
        shapes_m = []
        for op in (L1, LINF):
            cands = []
            for d in range(1, m):
                for sh in all_shapes[d]:
                    if sh[0] != op:
                        cands.append((d, sh))
            results = set()

            def rec(start, remaining, acc):
                if remaining == 0:
                    if len(acc) >= 2:
                        results.add(tuple(sorted(acc)))
                    return
                for idx in range(start, len(cands)):
                    d, sh = cands[idx]
                    if d <= remaining:
                        rec(idx, remaining - d, acc + [sh])

            rec(0, m, [])
            shapes_m.extend((op,) + parts for parts in sorted(results))
        all_shapes[m] = shapes_m

    def realize(shape, next_index):
        if shape == ("leaf",):
            return Leaf(next_index), next_index + 1
        op = shape[0]
        children = []
        for sub in shape[1:]:
            child, next_index = realize(sub, next_index)
            children.append(child)
        return _fold(op, children), next_index

    trees = []
    for shape in all_shapes[n]:
        tree, _ = realize(shape, 1)
        trees.append(tree)
    return trees


# ---------------------------------------------------------------------------
# vertices via maximal independent sets / cliques


@dataclass(frozen=True)
class SignedSupport:
    """A vector sum of +-e_j over a nonempty support set."""

    support: tuple  # sorted 1-based indices
    signs: tuple  # matching +1/-1 entries

    def vector(self, n):
        v = list(zero_vec(n))
        for j, s in zip(self.support, self.signs):
            v[j - 1] = RONE if s > 0 else -RONE
        return tuple(v)


def maximal_independent_sets(g):
    """All maximal independent sets, by exhaustive check over subsets."""
    verts = list(range(1, g.n + 1))
    out = []
    for r in range(1, g.n + 1):
        for sub in combinations(verts, r):
            if any(g.adjacent(i, j) for i, j in combinations(sub, 2)):
                continue
            subset = set(sub)
            if any(
                all(not g.adjacent(v, w) for w in sub)
                for v in verts
                if v not in subset
            ):
                continue
            out.append(sub)
    return out


def maximal_cliques(g):
    return maximal_independent_sets(complement(g))


def _signed(supports):
    out = []
    for sup in supports:
        for signs in product((1, -1), repeat=len(sup)):
            out.append(SignedSupport(tuple(sup), signs))
    return tuple(out)


def vertices(expr):
    """Vertices of the polytope: sign patterns over maximal independent sets."""
    return _signed(maximal_independent_sets(graph_of(expr)))


def polar_vertices(expr):
    """Vertices of the polar: sign patterns over maximal cliques."""
    return _signed(maximal_cliques(graph_of(expr)))


def vertex_vectors(expr):
    n = dim(expr)
    return tuple(sorted(v.vector(n) for v in vertices(expr)))


def polar_vertex_vectors(expr):
    n = dim(expr)
    return tuple(sorted(v.vector(n) for v in polar_vertices(expr)))


def vertices_by_sum_recursion(expr):
    """Vertex set computed independently through the extreme-point recursion
    ext(A l1 B) = ext(A) | ext(B) and ext(A linf B) = ext(A) + ext(B)."""
    n = dim(expr)

    def rec(e):
        if isinstance(e, Leaf):
            plus = list(zero_vec(n))
            plus[e.index - 1] = RONE
            minus = list(zero_vec(n))
            minus[e.index - 1] = -RONE
            return {tuple(plus), tuple(minus)}
        lv, rv = rec(e.left), rec(e.right)
        if e.op == L1:
            return lv | rv
        return {vadd(a, b) for a in lv for b in rv}

    return tuple(sorted(rec(expr)))


def check_cl_property(expr):
    """Verify |<v, v*>| = 1 for every vertex/polar-vertex pair.

    Returns (ok, violations); a violation would indicate an implementation
    bug, so it is reported rather than raised.
    """
    n = dim(expr)
    vs = [v.vector(n) for v in vertices(expr)]
    ws = [w.vector(n) for w in polar_vertices(expr)]
    violations = []
    for v in vs:
        for w in ws:
            val = RZERO
            for a, b in zip(v, w):
                val += a * b
            if val != 1 and val != -1:
                violations.append((v, w, val))
    return (not violations), violations
