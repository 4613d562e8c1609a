"""Labeled k-vertex graphs encoded as edge bitsets.

A graph on vertex set {0, ..., k-1} is stored as an integer whose bit
``p(a, b)`` is set iff ab is an edge, where ``p(a, b)`` is the position of
the pair (a, b), a < b, in the lexicographic list

    (0,1), (0,2), ..., (0,k-1), (1,2), ..., (k-2,k-1).

That integer is the graph's canonical index; the full index space for
order k has size 2**C(k,2).  The encoding is normative for rule files and
graphon serialization, so it must stay bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .errors import InvalidTupleError, UnsupportedOrderError

MIN_ORDER = 2
MAX_ORDER = 6


def check_order(k: int) -> None:
    if not MIN_ORDER <= k <= MAX_ORDER:
        raise UnsupportedOrderError(
            f"graph order must be in [{MIN_ORDER}, {MAX_ORDER}], got {k}"
        )


def pair_list(k: int) -> tuple[tuple[int, int], ...]:
    """Vertex pairs (a, b), a < b, in bit-position order."""
    return tuple((a, b) for a in range(k) for b in range(a + 1, k))


def pair_position(k: int, a: int, b: int) -> int:
    """Bit position of the unordered pair {a, b} in the order-k layout."""
    if a == b:
        raise InvalidTupleError(f"pair requires distinct vertices, got ({a}, {b})")
    if a > b:
        a, b = b, a
    # pairs with first vertex < a come first: (k-1) + (k-2) + ... + (k-a)
    return a * k - a * (a + 1) // 2 + (b - a - 1)


@dataclass(frozen=True)
class LabeledGraph:
    """Graph on vertex set {0..k-1} with a canonical integer index."""

    k: int
    edges: int  # bitset over pair_list(k)

    def __post_init__(self):
        check_order(self.k)
        nbits = comb(self.k, 2)
        if not 0 <= self.edges < (1 << nbits):
            raise ValueError(
                f"edge bitset {self.edges} out of range for order {self.k}"
            )

    @property
    def index(self) -> int:
        return self.edges

    @classmethod
    def from_index(cls, k: int, index: int) -> "LabeledGraph":
        return cls(k, index)

    @classmethod
    def from_edges(cls, k: int, pairs) -> "LabeledGraph":
        bits = 0
        for a, b in pairs:
            bits |= 1 << pair_position(k, a, b)
        return cls(k, bits)

    def has_edge(self, a: int, b: int) -> bool:
        return bool(self.edges >> pair_position(self.k, a, b) & 1)

    def edge_pairs(self) -> list[tuple[int, int]]:
        pairs = pair_list(self.k)
        return [pairs[p] for p in range(len(pairs)) if self.edges >> p & 1]

    def __repr__(self):
        return f"LabeledGraph(k={self.k}, index={self.edges})"


def enumerate_graphs(k: int) -> list[LabeledGraph]:
    """All 2**C(k,2) graphs of order k in canonical-index order."""
    check_order(k)
    return [LabeledGraph(k, i) for i in range(1 << comb(k, 2))]


def edge_count(g: LabeledGraph) -> int:
    return g.edges.bit_count()


def complement(g: LabeledGraph) -> LabeledGraph:
    full = (1 << comb(g.k, 2)) - 1
    return LabeledGraph(g.k, g.edges ^ full)


def component_closure(g: LabeledGraph) -> LabeledGraph:
    """Disjoint union of cliques with the same component structure as g."""
    k = g.k
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in g.edge_pairs():
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    bits = 0
    pairs = pair_list(k)
    for p, (a, b) in enumerate(pairs):
        if find(a) == find(b):
            bits |= 1 << p
    return LabeledGraph(k, bits)


def permute(g: LabeledGraph, perm) -> LabeledGraph:
    """Relabel vertices: edge ab maps to perm[a] perm[b]."""
    perm = list(perm)
    if sorted(perm) != list(range(g.k)):
        raise InvalidTupleError(f"not a permutation of range({g.k}): {perm}")
    bits = 0
    for a, b in g.edge_pairs():
        bits |= 1 << pair_position(g.k, perm[a], perm[b])
    return LabeledGraph(g.k, bits)


def induced_pattern(sim_graph, vertices) -> LabeledGraph:
    """Pattern drawn by an ordered tuple of distinct vertices of a SimGraph.

    Bit p(a, b) of the result is set iff vertices[a] vertices[b] is an edge;
    the order of the tuple matters.
    """
    tup = tuple(vertices)
    k = len(tup)
    check_order(k)
    n = sim_graph.n
    if len(set(tup)) != k:
        raise InvalidTupleError(f"tuple has repeated vertices: {tup}")
    if any(not 0 <= v < n for v in tup):
        raise InvalidTupleError(f"tuple entry out of range [0, {n}): {tup}")
    rows = sim_graph.rows
    bits = 0
    p = 0
    for a in range(k):
        ra = rows[tup[a]]
        for b in range(a + 1, k):
            if ra >> tup[b] & 1:
                bits |= 1 << p
            p += 1
    return LabeledGraph(k, bits)
