"""Flip-process rules: replacement matrices over labeled k-vertex graphs.

A rule of order k is a row-stochastic matrix R indexed by the 2**C(k,2)
labeled graphs; R[F][H] is the probability of replacing drawn pattern F
by H.  Rows are stored sparsely as sorted (H index, probability) lists.
Sampling uses the inverse CDF in ascending H-index order, which fixes the
exact mapping from a uniform variate to a replacement graph and keeps
simulations bit-reproducible.

The module also provides the derived tables used by the velocity
operator: signed pair coefficients and the expected edge-change sequence
over drawn-edge-count classes.
"""

from __future__ import annotations

import json
from math import comb

import numpy as np

from .errors import NonStochasticRowError, UnsupportedOrderError
from .graphs import LabeledGraph, check_order, complement, component_closure

PROB_TOL = 1e-12  # absolute tolerance on probabilities and row sums

# Dense enumeration-based builders stay within k <= 5; k = 6 rules must
# come from sparse rule files (memory: 2**15 x 2**15 dense is infeasible).
MAX_BUILDER_ORDER = 5


class Rule:
    """Order-k replacement rule with sparse rows and cached derived data."""

    def __init__(self, k: int, rows):
        check_order(k)
        self.k = k
        self.num_graphs = 1 << comb(k, 2)
        if len(rows) != self.num_graphs:
            raise ValueError(
                f"expected {self.num_graphs} rows for order {k}, got {len(rows)}"
            )
        self.rows = [sorted((int(h), float(p)) for h, p in row) for row in rows]
        self._cdfs = None
        self._pair_coeffs = None
        self._deltas = None

    @classmethod
    def from_row_map(cls, k: int, row_map: dict) -> "Rule":
        """Build from {F index: [(H index, prob), ...]}; missing rows idle."""
        n = 1 << comb(k, 2)
        rows = []
        for f in range(n):
            rows.append(row_map.get(f, [(f, 1.0)]))
        return cls(k, rows)

    def row_cdf(self, f: int):
        """(support, cdf) arrays for row f, in ascending H-index order."""
        if self._cdfs is None:
            self._cdfs = [None] * self.num_graphs
        if self._cdfs[f] is None:
            support = np.array([h for h, _ in self.rows[f]], dtype=np.int64)
            cdf = np.cumsum([p for _, p in self.rows[f]])
            self._cdfs[f] = (support, cdf)
        return self._cdfs[f]

    def sample_replacement(self, f: int, u: float) -> int:
        """Replacement index for drawn graph f and uniform variate u."""
        support, cdf = self.row_cdf(f)
        pos = int(np.searchsorted(cdf, u, side="right"))
        if pos >= len(support):
            pos = len(support) - 1
        return int(support[pos])

    def row_matrix(self) -> np.ndarray:
        """Dense R as a (num_graphs, num_graphs) array.  k <= 5 only."""
        if self.k > MAX_BUILDER_ORDER:
            raise UnsupportedOrderError(
                f"dense rule matrix not materialized for k={self.k}"
            )
        mat = np.zeros((self.num_graphs, self.num_graphs))
        for f, row in enumerate(self.rows):
            for h, p in row:
                mat[f, h] = p
        return mat

    def __repr__(self):
        return f"Rule(k={self.k}, graphs={self.num_graphs})"


def validate(rule: Rule) -> None:
    """Check row-stochasticity; raise NonStochasticRowError on the worst row."""
    worst_row, worst_residual = -1, 0.0
    for f, row in enumerate(rule.rows):
        seen = set()
        for h, p in row:
            if not 0 <= h < rule.num_graphs:
                raise NonStochasticRowError(f, 0.0, f"H index {h} out of range")
            if h in seen:
                raise NonStochasticRowError(f, 0.0, f"duplicate H index {h}")
            seen.add(h)
            if p < -PROB_TOL or p > 1 + PROB_TOL:
                raise NonStochasticRowError(f, 0.0, f"probability {p} outside [0, 1]")
        residual = abs(sum(p for _, p in row) - 1.0)
        if residual > worst_residual:
            worst_row, worst_residual = f, residual
    if worst_residual > PROB_TOL:
        raise NonStochasticRowError(worst_row, worst_residual)


# ---------------------------------------------------------------------------
# Derived tables


def pair_coefficients(rule: Rule) -> np.ndarray:
    """Signed pair coefficients c[F, p] over unordered pair positions p.

    c[F, p] = sum_H R[F][H] (1{pair p in H \\ F} - 1{pair p in F \\ H});
    the coefficient is the same for both orientations of the pair.  It is
    nonnegative when the pair is absent from F and nonpositive when
    present (a rule can only add, resp. delete, at that pair), and
    collapsing this inner sum once makes each velocity evaluation cost
    |H_k| instead of |H_k|^2 per pair.
    """
    if rule._pair_coeffs is not None:
        return rule._pair_coeffs
    npairs = comb(rule.k, 2)
    coeff = np.zeros((rule.num_graphs, npairs))
    for f, row in enumerate(rule.rows):
        for h, p in row:
            if p == 0.0 or h == f:
                continue
            diff = f ^ h
            for pos in range(npairs):
                if diff >> pos & 1:
                    coeff[f, pos] += p if (h >> pos & 1) else -p
    coeff.flags.writeable = False
    rule._pair_coeffs = coeff
    return coeff


def deltas(rule: Rule) -> np.ndarray:
    """Expected edge-count change per drawn-edge-count class.

    Entry ell is the mean of e(H) - e(F) over one replacement when the
    drawn graph F is uniform over the graphs with ell edges.
    """
    if rule._deltas is not None:
        return rule._deltas
    npairs = comb(rule.k, 2)
    sums = np.zeros(npairs + 1)
    for f, row in enumerate(rule.rows):
        ell = f.bit_count()
        change = sum(p * (h.bit_count() - ell) for h, p in row)
        sums[ell] += change
    counts = np.array([comb(npairs, ell) for ell in range(npairs + 1)], dtype=float)
    out = sums / counts
    out.flags.writeable = False
    rule._deltas = out
    return out


def is_trivial(rule: Rule) -> bool:
    """True iff every drawn graph is idle (replaced by itself w.p. 1)."""
    return len(idle_graphs(rule)) == rule.num_graphs


def idle_graphs(rule: Rule) -> set[int]:
    """Indices F with R[F][F] = 1 (up to probability tolerance)."""
    idle = set()
    for f, row in enumerate(rule.rows):
        for h, p in row:
            if h == f and abs(p - 1.0) <= PROB_TOL:
                idle.add(f)
    return idle


# ---------------------------------------------------------------------------
# Builders for the example rule families


def erdos_renyi_rule() -> Rule:
    """Order 2: every drawn pair becomes an edge."""
    return Rule(2, [[(1, 1.0)], [(1, 1.0)]])


def triangle_removal_rule() -> Rule:
    """Order 3: a drawn triangle loses all edges; everything else idles."""
    return removal_rule(LabeledGraph.from_index(3, 0b111))


def removal_rule(pattern: LabeledGraph) -> Rule:
    """Drawn supergraphs of `pattern` lose its edges; others idle."""
    k = pattern.k
    if k > MAX_BUILDER_ORDER:
        raise UnsupportedOrderError(f"dense builder limited to k <= {MAX_BUILDER_ORDER}")
    fbits = pattern.edges
    rows = []
    for h in range(1 << comb(k, 2)):
        if h & fbits == fbits:
            rows.append([(h & ~fbits, 1.0)])
        else:
            rows.append([(h, 1.0)])
    return Rule(k, rows)


def complementing_rule(k: int) -> Rule:
    """Each drawn graph is replaced by its complement."""
    _check_builder_order(k)
    rows = [[(complement(LabeledGraph(k, f)).edges, 1.0)] for f in range(1 << comb(k, 2))]
    return Rule(k, rows)


def component_completion_rule(k: int) -> Rule:
    """Each drawn graph is replaced by its component closure."""
    _check_builder_order(k)
    rows = [
        [(component_closure(LabeledGraph(k, f)).edges, 1.0)]
        for f in range(1 << comb(k, 2))
    ]
    return Rule(k, rows)


def stirring_rule(k: int, variant: str = "firm") -> Rule:
    """Replace the drawn graph by a uniform (firm) or binomial (loose)
    random graph with the same edge count, resp. the same expected count.
    """
    _check_builder_order(k)
    if variant not in ("firm", "loose"):
        raise ValueError(f"stirring variant must be 'firm' or 'loose', got {variant!r}")
    npairs = comb(k, 2)
    ngraphs = 1 << npairs
    by_count = [[] for _ in range(npairs + 1)]
    for h in range(ngraphs):
        by_count[h.bit_count()].append(h)
    rows = []
    for f in range(ngraphs):
        ell = f.bit_count()
        if variant == "firm":
            peers = by_count[ell]
            prob = 1.0 / len(peers)
            rows.append([(h, prob) for h in peers])
        else:
            p = ell / npairs
            row = []
            for h in range(ngraphs):
                e = h.bit_count()
                prob = p**e * (1 - p) ** (npairs - e)
                if prob > 0.0:
                    row.append((h, prob))
            rows.append(row)
    return Rule(k, rows)


def extremist_rule(k: int) -> Rule:
    """Dense drawn graphs become complete, sparse ones edgeless.

    The threshold is C(k,2)/2: above it the replacement is the complete
    graph, below it the edgeless graph, and exactly at it the rule idles.
    """
    if k < 3:
        raise UnsupportedOrderError("extremist rule needs k >= 3")
    _check_builder_order(k)
    npairs = comb(k, 2)
    full = (1 << npairs) - 1
    half = npairs / 2
    rows = []
    for f in range(full + 1):
        ell = f.bit_count()
        if ell > half:
            rows.append([(full, 1.0)])
        elif ell < half:
            rows.append([(0, 1.0)])
        else:
            rows.append([(f, 1.0)])
    return Rule(k, rows)


def ignorant_rule(k: int, dist) -> Rule:
    """Replacement distribution independent of the drawn graph."""
    _check_builder_order(k)
    ngraphs = 1 << comb(k, 2)
    dist = np.asarray(dist, dtype=float)
    if dist.shape != (ngraphs,):
        raise ValueError(f"distribution must have length {ngraphs}")
    if abs(dist.sum() - 1.0) > PROB_TOL or (dist < -PROB_TOL).any():
        raise NonStochasticRowError(0, abs(dist.sum() - 1.0), "ignorant distribution")
    row = [(h, float(p)) for h, p in enumerate(dist) if p > 0.0]
    return Rule(k, [list(row) for _ in range(ngraphs)])


def average_density(dist) -> float:
    """Mean edge density of a replacement distribution over order-k graphs."""
    dist = np.asarray(dist, dtype=float)
    ngraphs = len(dist)
    npairs = (ngraphs - 1).bit_length()
    edges = np.array([h.bit_count() for h in range(ngraphs)], dtype=float)
    return float(np.dot(dist, edges) / npairs)


def _check_builder_order(k: int) -> None:
    check_order(k)
    if k > MAX_BUILDER_ORDER:
        raise UnsupportedOrderError(
            f"dense builders are limited to k <= {MAX_BUILDER_ORDER}; "
            f"supply k = 6 rules via sparse rule files"
        )


# ---------------------------------------------------------------------------
# Rule files (JSON, normative):
#   { "k": int, "rows": [ [F_index, [[H_index, prob], ...]], ... ] }
# Omitted rows default to identity (idle).  The writer emits rows sorted
# by F index and entries sorted by H index.


def save_rule(rule: Rule, path) -> None:
    rows = []
    for f, row in enumerate(rule.rows):
        if row == [(f, 1.0)]:
            continue  # idle rows are implicit
        rows.append([f, [[h, p] for h, p in row]])
    payload = {"k": rule.k, "rows": rows}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_rule(path) -> Rule:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    k = int(payload["k"])
    check_order(k)
    row_map = {}
    for f, entries in payload["rows"]:
        row_map[int(f)] = [(int(h), float(p)) for h, p in entries]
    rule = Rule.from_row_map(k, row_map)
    validate(rule)
    return rule


# ---------------------------------------------------------------------------
# Named registry used by the CLI and the property suites


def _uniform_dist(k: int) -> np.ndarray:
    n = 1 << comb(k, 2)
    return np.full(n, 1.0 / n)


BUILTIN_RULES = {
    "er": erdos_renyi_rule,
    "triangle-removal": triangle_removal_rule,
    "edge-removal": lambda: removal_rule(LabeledGraph.from_edges(3, [(0, 1)])),
    "complementing:3": lambda: complementing_rule(3),
    "component-completion:3": lambda: component_completion_rule(3),
    "stirring-firm:3": lambda: stirring_rule(3, "firm"),
    "stirring-loose:3": lambda: stirring_rule(3, "loose"),
    "extremist:3": lambda: extremist_rule(3),
    "extremist:4": lambda: extremist_rule(4),
    "extremist:5": lambda: extremist_rule(5),
    "ignorant-uniform:3": lambda: ignorant_rule(3, _uniform_dist(3)),
}


def make_rule(spec: str) -> Rule:
    """Build a rule from a CLI spec string.

    Accepts registry names plus parameterized forms:
    ``removal:<k>:<F index>``, ``complementing:<k>``,
    ``component-completion:<k>``, ``stirring-firm:<k>``,
    ``stirring-loose:<k>``, ``extremist:<k>``, ``ignorant-uniform:<k>``.
    """
    if spec in BUILTIN_RULES:
        return BUILTIN_RULES[spec]()
    parts = spec.split(":")
    head = parts[0]
    try:
        if head == "removal" and len(parts) == 3:
            return removal_rule(LabeledGraph.from_index(int(parts[1]), int(parts[2])))
        if head == "complementing" and len(parts) == 2:
            return complementing_rule(int(parts[1]))
        if head == "component-completion" and len(parts) == 2:
            return component_completion_rule(int(parts[1]))
        if head == "stirring-firm" and len(parts) == 2:
            return stirring_rule(int(parts[1]), "firm")
        if head == "stirring-loose" and len(parts) == 2:
            return stirring_rule(int(parts[1]), "loose")
        if head == "extremist" and len(parts) == 2:
            return extremist_rule(int(parts[1]))
        if head == "ignorant-uniform" and len(parts) == 2:
            return ignorant_rule(int(parts[1]), _uniform_dist(int(parts[1])))
    except ValueError as exc:
        raise ValueError(f"bad rule spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown rule spec {spec!r}")
