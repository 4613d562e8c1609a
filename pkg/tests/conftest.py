"""Shared helpers: random step functions and brute-force oracles.

The oracles here are deliberately independent of the library code paths
they check: densities enumerate assignments with itertools, cut norms
enumerate every subset pair, and rooted densities multiply factors in
plain Python loops.
"""

import itertools

import numpy as np
import pytest

from flipflow import LabeledGraph, StepGraphon, StepKernel, pair_list


def random_graphon(rng: np.random.Generator, m: int) -> StepGraphon:
    masses = rng.dirichlet(np.ones(m))
    vals = rng.random((m, m))
    vals = (vals + vals.T) / 2
    return StepGraphon(masses, vals)


def random_kernel(rng: np.random.Generator, m: int, scale: float = 1.0) -> StepKernel:
    masses = rng.dirichlet(np.ones(m))
    vals = rng.normal(scale=scale, size=(m, m))
    vals = (vals + vals.T) / 2
    return StepKernel(masses, vals)


def random_graphon_pair(rng: np.random.Generator, m: int):
    """Two graphons on identical masses."""
    masses = rng.dirichlet(np.ones(m))
    out = []
    for _ in range(2):
        vals = rng.random((m, m))
        vals = (vals + vals.T) / 2
        out.append(StepGraphon(masses, vals))
    return out


def brute_density(pattern: LabeledGraph, w: StepKernel, induced: bool) -> float:
    """Assignment enumeration with plain Python products."""
    k, m = pattern.k, w.m
    pairs = pair_list(k)
    total = 0.0
    for assign in itertools.product(range(m), repeat=k):
        weight = 1.0
        for part in assign:
            weight *= w.masses[part]
        prob = 1.0
        for p, (a, b) in enumerate(pairs):
            v = w.values[assign[a], assign[b]]
            if pattern.edges >> p & 1:
                prob *= v
            elif induced:
                prob *= 1.0 - v
        total += weight * prob
    return total


def brute_rooted(pattern, roots, parts, w, induced=True) -> float:
    """Rooted density by enumeration over the free vertices."""
    k, m = pattern.k, w.m
    a, b = roots
    free = [v for v in range(k) if v not in roots]
    pairs = pair_list(k)
    total = 0.0
    for free_assign in itertools.product(range(m), repeat=len(free)):
        assign = [None] * k
        assign[a], assign[b] = parts
        for v, part in zip(free, free_assign):
            assign[v] = part
        weight = 1.0
        for part in free_assign:
            weight *= w.masses[part]
        prob = 1.0
        for p, (u, v) in enumerate(pairs):
            val = w.values[assign[u], assign[v]]
            if pattern.edges >> p & 1:
                prob *= val
            elif induced:
                prob *= 1.0 - val
        total += weight * prob
    return total


def brute_cut_norm(kern: StepKernel) -> float:
    """Full enumeration over all 4**m subset pairs."""
    m = kern.m
    weighted = np.outer(kern.masses, kern.masses) * kern.values
    best = 0.0
    for s_bits in range(1 << m):
        srows = [i for i in range(m) if s_bits >> i & 1]
        for t_bits in range(1 << m):
            tcols = [j for j in range(m) if t_bits >> j & 1]
            val = abs(weighted[np.ix_(srows, tcols)].sum()) if srows and tcols else 0.0
            best = max(best, val)
    return best


def graph_components(g: LabeledGraph) -> int:
    parent = list(range(g.k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in g.edge_pairs():
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(v) for v in range(g.k)})


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
