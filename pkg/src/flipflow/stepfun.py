"""Step graphons and kernels on finitely many parts.

A step function is determined by part masses (positive, summing to 1)
and a symmetric value matrix.  Step graphons carry values in [0, 1] up to
a small numeric band; step kernels are unrestricted (velocities and
differences live here).  The module also provides subgraph densities,
rooted induced densities, cut norms and distances, graph sampling, and
the block-averaged graphon of a finite simulation graph.
"""

from __future__ import annotations

import itertools
import json

import numpy as np

from .errors import GuardExceededError, MassMismatchError
from .graphs import LabeledGraph, pair_list

MASS_TOL = 1e-12
VALUE_BAND = 1e-9  # allowed numeric excursion outside [0, 1]

DENSITY_GUARD = 10**8  # maximum m**k assignment enumeration
CUT_EXACT_GUARD = 14  # maximum part count for exact cut norm
CUT_PERM_GUARD = 8  # maximum part count for permutation cut distance


def _check_masses(masses: np.ndarray) -> None:
    if masses.ndim != 1 or len(masses) == 0:
        raise ValueError("masses must be a non-empty 1-d sequence")
    if (masses <= 0).any():
        raise ValueError("all part masses must be positive")
    if abs(masses.sum() - 1.0) > MASS_TOL:
        raise ValueError(f"part masses must sum to 1, got {masses.sum()!r}")


class StepKernel:
    """Symmetric step function with unrestricted real values."""

    def __init__(self, masses, values):
        masses = np.asarray(masses, dtype=float).copy()
        values = np.asarray(values, dtype=float).copy()
        _check_masses(masses)
        if values.shape != (len(masses), len(masses)):
            raise ValueError(
                f"values must be {len(masses)}x{len(masses)}, got {values.shape}"
            )
        if not np.allclose(values, values.T, rtol=0.0, atol=MASS_TOL):
            raise ValueError("value matrix must be symmetric")
        masses.flags.writeable = False
        values.flags.writeable = False
        self.masses = masses
        self.values = values

    @property
    def m(self) -> int:
        return len(self.masses)

    def edge_density(self) -> float:
        """Integral of the step function over the whole square."""
        return float(self.masses @ self.values @ self.masses)

    def __repr__(self):
        return f"{type(self).__name__}(m={self.m}, density={self.edge_density():.6g})"


class StepGraphon(StepKernel):
    """Step kernel with values in [0, 1] up to the numeric band."""

    def __init__(self, masses, values, band: float = VALUE_BAND):
        super().__init__(masses, values)
        lo, hi = self.values.min(), self.values.max()
        if lo < -band or hi > 1 + band:
            raise ValueError(
                f"graphon values outside [{-band}, {1 + band}]: range [{lo}, {hi}]"
            )


def constant(d: float) -> StepGraphon:
    """One-part graphon of constant value d."""
    if not 0 <= d <= 1:
        raise ValueError(f"constant graphon value must be in [0, 1], got {d}")
    return StepGraphon(np.array([1.0]), np.array([[float(d)]]))


def two_block(masses, x_diag1: float, x_diag2: float, y_off: float) -> StepGraphon:
    """Two-part graphon with diagonal values x1, x2 and off-diagonal y."""
    for v in (x_diag1, x_diag2, y_off):
        if not 0 <= v <= 1:
            raise ValueError(f"two-block values must be in [0, 1], got {v}")
    values = np.array([[x_diag1, y_off], [y_off, x_diag2]], dtype=float)
    return StepGraphon(np.asarray(masses, dtype=float), values)


# ---------------------------------------------------------------------------
# Densities


def _assignment_chunks(m: int, k: int, chunk: int = 1 << 16):
    """Yield (rows, k) arrays covering the m**k assignment grid."""
    total = m**k
    powers = m ** np.arange(k - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield (idx[:, None] // powers) % m


def _guard_assignments(m: int, k: int) -> None:
    if m**k > DENSITY_GUARD:
        raise GuardExceededError(
            f"density enumeration needs {m}**{k} assignments "
            f"(> {DENSITY_GUARD}); coarsen the graphon first"
        )


def density(pattern: LabeledGraph, w: StepKernel) -> float:
    """Probability-weighted count of edge-respecting vertex placements."""
    return _density_impl(pattern, w, induced=False)


def induced_density(pattern: LabeledGraph, w: StepKernel) -> float:
    """Like density but non-edges must also be respected."""
    return _density_impl(pattern, w, induced=True)


def _density_impl(pattern: LabeledGraph, w: StepKernel, induced: bool) -> float:
    k, m = pattern.k, w.m
    _guard_assignments(m, k)
    pairs = pair_list(k)
    d = w.values
    total = 0.0
    for assign in _assignment_chunks(m, k):
        weight = np.prod(w.masses[assign], axis=1)
        prob = np.ones(len(assign))
        for p, (a, b) in enumerate(pairs):
            vals = d[assign[:, a], assign[:, b]]
            if pattern.edges >> p & 1:
                prob *= vals
            elif induced:
                prob *= 1.0 - vals
        total += float(weight @ prob)
    return total


def rooted_induced_density(
    pattern: LabeledGraph, roots, parts, w: StepKernel
) -> float:
    """Induced density with two root vertices pinned to fixed parts.

    `roots` is an ordered pair (a, b) of distinct pattern vertices and
    `parts` the pair of part indices they are pinned to; the remaining
    k - 2 vertices are averaged over the part measure.  The pinned pair's
    own edge/non-edge factor is included.
    """
    a, b = roots
    if a == b:
        raise ValueError("roots must be distinct vertices")
    k, m = pattern.k, w.m
    _guard_assignments(m, max(k - 2, 1))
    free = [v for v in range(k) if v != a and v != b]
    pairs = pair_list(k)
    d = w.values
    total = 0.0
    for free_assign in _assignment_chunks(m, len(free)):
        rows = len(free_assign)
        assign = np.empty((rows, k), dtype=np.int64)
        assign[:, a] = parts[0]
        assign[:, b] = parts[1]
        for col, v in enumerate(free):
            assign[:, v] = free_assign[:, col]
        weight = np.prod(w.masses[free_assign], axis=1)
        prob = np.ones(rows)
        for p, (u, v) in enumerate(pairs):
            vals = d[assign[:, u], assign[:, v]]
            prob *= vals if pattern.edges >> p & 1 else 1.0 - vals
        total += float(weight @ prob)
    return total


# ---------------------------------------------------------------------------
# Norms and distances


def kernel_sub(u: StepKernel, w: StepKernel) -> StepKernel:
    """Entrywise difference of two step functions on the same parts."""
    _require_same_masses(u, w)
    return StepKernel(u.masses, u.values - w.values)


def linf_dist(u: StepKernel, w: StepKernel) -> float:
    _require_same_masses(u, w)
    return float(np.max(np.abs(u.values - w.values)))


def l1_dist(u: StepKernel, w: StepKernel) -> float:
    _require_same_masses(u, w)
    mm = np.outer(u.masses, u.masses)
    return float(np.sum(mm * np.abs(u.values - w.values)))


def _require_same_masses(u: StepKernel, w: StepKernel) -> None:
    if u.m != w.m or not np.allclose(u.masses, w.masses, rtol=0.0, atol=MASS_TOL):
        raise MassMismatchError("step functions live on different part masses")


def cut_norm_exact(k: StepKernel, with_witness: bool = False):
    """Exact cut norm of a step kernel by subset enumeration.

    Exactness on step functions lets the sup over measurable rectangles
    be taken over unions of parts only.  For each row subset S the best
    column subset is the positive (or negative) support of the summed
    rows, so the enumeration is 2^m * m, capped at m = 14.
    """
    m = k.m
    if m > CUT_EXACT_GUARD:
        raise GuardExceededError(
            f"exact cut norm enumerates 2**{m} subsets (cap m = {CUT_EXACT_GUARD}); "
            f"use cut_norm_lower_bound instead"
        )
    weighted = np.outer(k.masses, k.masses) * k.values
    # row_sums[s] = column sums over the row subset s, built incrementally
    best_val = 0.0
    best_s = 0
    best_pos = True
    row_sums = np.zeros((1 << m, m))
    for s in range(1, 1 << m):
        low = s & -s
        i = low.bit_length() - 1
        row_sums[s] = row_sums[s ^ low] + weighted[i]
        pos = row_sums[s][row_sums[s] > 0].sum()
        neg = -row_sums[s][row_sums[s] < 0].sum()
        if pos > best_val:
            best_val, best_s, best_pos = pos, s, True
        if neg > best_val:
            best_val, best_s, best_pos = neg, s, False
    if not with_witness:
        return float(best_val)
    rows = tuple(i for i in range(m) if best_s >> i & 1)
    sums = row_sums[best_s]
    cols = tuple(
        j for j in range(m) if (sums[j] > 0 if best_pos else sums[j] < 0)
    )
    return float(best_val), (rows, cols)


def cut_norm_lower_bound(k: StepKernel, restarts: int = 64, seed: int = 0) -> float:
    """Randomized local-search lower bound on the cut norm.

    Runs `restarts` greedy searches over (S, T) membership vectors,
    flipping single elements while the rectangle sum improves.  The
    result never exceeds the true cut norm.
    """
    m = k.m
    weighted = np.outer(k.masses, k.masses) * k.values
    rng = np.random.Generator(np.random.Philox(key=seed))
    s = rng.random((restarts, m)) < 0.5
    t = rng.random((restarts, m)) < 0.5
    # even restarts maximize the rectangle sum, odd ones its negation
    sign = np.where(np.arange(restarts) % 2 == 0, 1.0, -1.0)
    w = weighted[None, :, :] * sign[:, None, None]  # (restarts, m, m)
    for _ in range(4 * m * m + 8):
        # gain of flipping row i: (1 - 2 s_i) * sum_j in T of w[i, j]
        row_gain = (1.0 - 2.0 * s) * np.einsum("rij,rj->ri", w, t.astype(float))
        col_gain = (1.0 - 2.0 * t) * np.einsum("rij,ri->rj", w, s.astype(float))
        gains = np.concatenate([row_gain, col_gain], axis=1)
        best = gains.argmax(axis=1)
        best_gain = gains[np.arange(restarts), best]
        improving = best_gain > 1e-15
        if not improving.any():
            break
        idx = best[improving]
        rows_mask = idx < m
        rsel = np.flatnonzero(improving)
        s_rows = rsel[rows_mask]
        s[s_rows, idx[rows_mask]] ^= True
        t_rows = rsel[~rows_mask]
        t[t_rows, idx[~rows_mask] - m] ^= True
    totals = np.einsum("ri,ij,rj->r", s.astype(float), weighted, t.astype(float))
    return float(np.max(np.abs(totals))) if restarts > 0 else 0.0


def cut_distance_perm(u: StepKernel, w: StepKernel) -> float:
    """Upper bound on the cut distance via part relabelings.

    Minimizes the exact cut norm of u - w∘sigma over mass-preserving part
    permutations sigma; restricted to relabelings, so the value is an
    upper bound on the full rearrangement distance.
    """
    if u.m != w.m or not np.allclose(
        np.sort(u.masses), np.sort(w.masses), rtol=0.0, atol=MASS_TOL
    ):
        raise MassMismatchError("part mass multisets differ")
    m = u.m
    if m > CUT_PERM_GUARD:
        raise GuardExceededError(
            f"permutation cut distance enumerates {m}! relabelings (cap m = {CUT_PERM_GUARD})"
        )
    best = np.inf
    for perm in itertools.permutations(range(m)):
        perm = list(perm)
        if not np.allclose(w.masses[perm], u.masses, rtol=0.0, atol=MASS_TOL):
            continue
        permuted = w.values[np.ix_(perm, perm)]
        diff = StepKernel(u.masses, u.values - permuted)
        best = min(best, cut_norm_exact(diff))
    return float(best)


# ---------------------------------------------------------------------------
# Finite simulation graphs


class SimGraph:
    """Simple graph on n vertices with bitset adjacency rows.

    Row u is an integer whose bit v is set iff uv is an edge.  `part_of`
    assigns each vertex to a part of the step-graphon partition it was
    sampled from (or any caller-chosen grouping).
    """

    def __init__(self, n: int, rows=None, part_of=None):
        self.n = n
        self.rows = list(rows) if rows is not None else [0] * n
        if len(self.rows) != n:
            raise ValueError(f"expected {n} adjacency rows, got {len(self.rows)}")
        if part_of is None:
            part_of = [0] * n
        self.part_of = list(int(p) for p in part_of)
        if len(self.part_of) != n:
            raise ValueError("part assignment must cover every vertex")

    @property
    def num_parts(self) -> int:
        return max(self.part_of) + 1 if self.part_of else 0

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise ValueError("self-loops are not allowed")
        self.rows[u] |= 1 << v
        self.rows[v] |= 1 << u

    def remove_edge(self, u: int, v: int) -> None:
        self.rows[u] &= ~(1 << v)
        self.rows[v] &= ~(1 << u)

    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def edges(self):
        """Yield edges (u, v) with u < v."""
        for u in range(self.n):
            r = self.rows[u] >> (u + 1)
            base = u + 1
            while r:
                low = r & -r
                yield u, base + low.bit_length() - 1
                r ^= low

    def copy(self) -> "SimGraph":
        return SimGraph(self.n, list(self.rows), list(self.part_of))

    def adjacency_matrix(self) -> np.ndarray:
        nbytes = (self.n + 7) // 8
        raw = b"".join(r.to_bytes(nbytes, "little") for r in self.rows)
        bits = np.unpackbits(
            np.frombuffer(raw, dtype=np.uint8).reshape(self.n, nbytes),
            axis=1,
            bitorder="little",
        )
        return bits[:, : self.n].astype(bool)

    def __repr__(self):
        return f"SimGraph(n={self.n}, edges={self.edge_count()})"


def sample_graph(n: int, w: StepGraphon, rng: np.random.Generator) -> SimGraph:
    """Sample an n-vertex graph from a step graphon.

    Each vertex receives an independent mass-distributed part label and
    each pair an independent edge with the block probability.
    """
    if n < 1:
        raise ValueError("need at least one vertex")
    parts = rng.choice(w.m, size=n, p=w.masses)
    adj = np.zeros((n, n), dtype=bool)
    d = w.values
    for u in range(n - 1):
        probs = d[parts[u], parts[u + 1 :]]
        hits = rng.random(n - u - 1) < probs
        adj[u, u + 1 :] = hits
    adj |= adj.T
    rows = _pack_rows(adj)
    return SimGraph(n, rows, parts.tolist())


def _pack_rows(adj: np.ndarray) -> list[int]:
    packed = np.packbits(adj, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def stepped(graph: SimGraph, target_masses=None) -> StepGraphon:
    """Block-averaged graphon of a simulation graph over its parts.

    Off-diagonal blocks average cross edges; diagonal blocks use the
    convention that counts both orientations of within-part edges, so a
    complete part of v vertices averages to 1 - 1/v.  Masses default to
    the empirical part frequencies; pass `target_masses` (e.g. those of
    the trajectory graphon the parts came from) to compare step functions
    on a common partition.
    """
    n = graph.n
    m = graph.num_parts
    sizes = np.bincount(graph.part_of, minlength=m)
    if (sizes == 0).any():
        empty = int(np.flatnonzero(sizes == 0)[0])
        raise ValueError(f"part {empty} contains no vertices")
    counts = np.zeros((m, m), dtype=np.int64)
    part_of = graph.part_of
    for u, v in graph.edges():
        i, j = part_of[u], part_of[v]
        if i > j:
            i, j = j, i
        counts[i, j] += 1
    values = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            if i == j:
                values[i, i] = 2.0 * counts[i, i] / (sizes[i] * sizes[i])
            else:
                values[i, j] = values[j, i] = counts[i, j] / (sizes[i] * sizes[j])
    if target_masses is None:
        masses = sizes / n
    else:
        masses = np.asarray(target_masses, dtype=float)
    return StepGraphon(masses, values)


# ---------------------------------------------------------------------------
# Serialization
#
# Step graphon files (JSON, normative): { "masses": [...], "values": [[...]] }.
# Simulation graphs export as an edge list, one "u v" per line, 1-based,
# u < v, with a part-assignment sidecar file of "vertex part" lines.


def save_graphon(w: StepKernel, path) -> None:
    payload = {"masses": w.masses.tolist(), "values": w.values.tolist()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_graphon(path, kernel: bool = False) -> StepKernel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    cls = StepKernel if kernel else StepGraphon
    return cls(np.asarray(payload["masses"]), np.asarray(payload["values"]))


def save_sim_graph(graph: SimGraph, path) -> None:
    path = str(path)
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in graph.edges():
            fh.write(f"{u + 1} {v + 1}\n")
    with open(path + ".parts", "w", encoding="utf-8") as fh:
        for v, p in enumerate(graph.part_of):
            fh.write(f"{v + 1} {p + 1}\n")


def load_sim_graph(path) -> SimGraph:
    path = str(path)
    part_of = {}
    with open(path + ".parts", encoding="utf-8") as fh:
        for line in fh:
            v, p = line.split()
            part_of[int(v) - 1] = int(p) - 1
    n = len(part_of)
    graph = SimGraph(n, part_of=[part_of[v] for v in range(n)])
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            u, v = line.split()
            graph.add_edge(int(u) - 1, int(v) - 1)
    return graph
