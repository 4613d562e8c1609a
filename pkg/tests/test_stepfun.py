import itertools
from math import comb

import numpy as np
import pytest

from flipflow import (
    GuardExceededError,
    LabeledGraph,
    MassMismatchError,
    SimGraph,
    StepGraphon,
    StepKernel,
    constant,
    cut_distance_perm,
    cut_norm_exact,
    cut_norm_lower_bound,
    density,
    enumerate_graphs,
    induced_density,
    induced_pattern,
    kernel_sub,
    l1_dist,
    linf_dist,
    load_graphon,
    load_sim_graph,
    rooted_induced_density,
    sample_graph,
    save_graphon,
    save_sim_graph,
    stepped,
    substream,
    two_block,
)
from conftest import (
    brute_cut_norm,
    brute_density,
    brute_rooted,
    random_graphon,
    random_graphon_pair,
    random_kernel,
)

EDGE2 = LabeledGraph.from_edges(2, [(0, 1)])
TRIANGLE = LabeledGraph.from_index(3, 0b111)


def test_constructors():
    c = constant(0.5)
    assert c.m == 1 and c.values[0, 0] == 0.5
    tb = two_block((0.5, 0.5), 0.95, 0.95, 0.18)
    assert tb.m == 2 and tb.values[0, 1] == 0.18
    with pytest.raises(ValueError):
        constant(1.5)
    with pytest.raises(ValueError):
        two_block((0.5, 0.5), -0.2, 0.5, 0.5)
    with pytest.raises(ValueError):
        StepGraphon([0.5, 0.6], np.zeros((2, 2)))  # masses exceed 1


def test_density_closed_forms():
    for d in (0.0, 0.3, 1.0):
        assert density(EDGE2, constant(d)) == pytest.approx(d, abs=1e-15)
        assert density(TRIANGLE, constant(d)) == pytest.approx(d**3, abs=1e-15)
    # only monochromatic assignments survive when the off-diagonal is 0
    tb = two_block((0.5, 0.5), 1.0, 1.0, 0.0)
    assert density(TRIANGLE, tb) == pytest.approx(0.25, abs=1e-14)
    one = constant(1.0)
    equivalent = two_block((0.5, 0.5), 1.0, 1.0, 1.0)
    for g in enumerate_graphs(3):
        assert density(g, one) == pytest.approx(density(g, equivalent), abs=1e-13)


def test_density_against_brute_force(rng):
    for _ in range(5):
        w = random_graphon(rng, int(rng.integers(1, 4)))
        for g in (EDGE2, TRIANGLE, LabeledGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])):
            assert density(g, w) == pytest.approx(brute_density(g, w, False), abs=1e-12)
            assert induced_density(g, w) == pytest.approx(
                brute_density(g, w, True), abs=1e-12
            )


def test_density_guard():
    big = StepGraphon(np.full(40, 1 / 40), np.full((40, 40), 0.5))
    with pytest.raises(GuardExceededError):
        density(LabeledGraph.from_index(6, 0), big)


def test_rooted_density_basics(rng):
    tb = two_block((0.4, 0.6), 0.9, 0.2, 0.5)
    empty2 = LabeledGraph.from_index(2, 0)
    for i in range(2):
        for j in range(2):
            assert rooted_induced_density(EDGE2, (0, 1), (i, j), tb) == pytest.approx(
                tb.values[i, j]
            )
            assert rooted_induced_density(empty2, (0, 1), (i, j), tb) == pytest.approx(
                1 - tb.values[i, j]
            )
    # distribution over patterns: sums to one for every root/part pair
    for _ in range(3):
        w = random_graphon(rng, 3)
        for roots in ((0, 1), (2, 0)):
            for parts in ((0, 0), (1, 2)):
                total = sum(
                    rooted_induced_density(g, roots, parts, w)
                    for g in enumerate_graphs(3)
                )
                assert total == pytest.approx(1.0, abs=1e-12)


def test_rooted_density_against_brute_force(rng):
    w = random_graphon(rng, 3)
    for g in enumerate_graphs(3):
        for roots in ((0, 1), (1, 2), (2, 0)):
            for parts in ((0, 1), (2, 2)):
                assert rooted_induced_density(g, roots, parts, w) == pytest.approx(
                    brute_rooted(g, roots, parts, w), abs=1e-12
                )


def test_rooted_supergraph_sum_matches_plain_rooted_density(rng):
    # non-induced rooted density equals the induced one summed over all
    # supergraphs inside the same order
    w = random_graphon(rng, 3)
    k = 3
    for f in enumerate_graphs(k):
        for roots in ((0, 1), (1, 2)):
            for parts in ((0, 2), (1, 1)):
                direct = brute_rooted(f, roots, parts, w, induced=False)
                total = sum(
                    rooted_induced_density(h, roots, parts, w)
                    for h in enumerate_graphs(k)
                    if h.edges & f.edges == f.edges
                )
                assert total == pytest.approx(direct, abs=1e-12)


def test_cut_norm_exact_closed_forms():
    assert cut_norm_exact(StepKernel([1.0], [[0.0]])) == 0.0
    assert cut_norm_exact(StepKernel([1.0], [[-0.8]])) == pytest.approx(0.8)
    a = 0.6
    k = StepKernel([0.5, 0.5], [[a, -a], [-a, a]])
    val, (rows, cols) = cut_norm_exact(k, with_witness=True)
    assert val == pytest.approx(a / 4)
    weighted = np.outer(k.masses, k.masses) * k.values
    assert abs(weighted[np.ix_(rows, cols)].sum()) == pytest.approx(val)


def test_cut_norm_exact_against_brute_force(rng):
    for m in (1, 2, 3, 4, 5):
        for _ in range(4):
            k = random_kernel(rng, m)
            assert cut_norm_exact(k) == pytest.approx(brute_cut_norm(k), abs=1e-13)


def test_cut_norm_guard():
    k = StepKernel(np.full(15, 1 / 15), np.zeros((15, 15)))
    with pytest.raises(GuardExceededError):
        cut_norm_exact(k)


def test_cut_norm_lower_bound(rng):
    assert cut_norm_lower_bound(StepKernel([1.0], [[0.0]]), 8, 0) == 0.0
    assert cut_norm_lower_bound(StepKernel([1.0], [[0.7]]), 8, 0) == pytest.approx(0.7)
    for m in (2, 4, 6, 8, 10):
        for trial in range(4):
            k = random_kernel(rng, m)
            exact = cut_norm_exact(k)
            lower = cut_norm_lower_bound(k, restarts=20 * m, seed=trial)
            assert lower <= exact + 1e-12
            assert lower == pytest.approx(exact, abs=1e-12)


def test_density_gaps_and_self_rectangle_bound(rng):
    for _ in range(5):
        u, w = random_graphon_pair(rng, int(rng.integers(2, 5)))
        cut = cut_norm_exact(kernel_sub(u, w))
        for k in (2, 3, 4):
            for f in enumerate_graphs(k):
                gap = abs(density(f, u) - density(f, w))
                assert gap <= f.edges.bit_count() * cut + 1e-12
        # the cut norm is at most twice the best S x S rectangle
        diff = kernel_sub(u, w)
        weighted = np.outer(diff.masses, diff.masses) * diff.values
        m = diff.m
        best_square = max(
            abs(weighted[np.ix_(s, s)].sum())
            for bits in range(1, 1 << m)
            for s in [[i for i in range(m) if bits >> i & 1]]
        )
        assert cut_norm_exact(diff) <= 2 * best_square + 1e-12


def test_distances():
    u = constant(0.25)
    w = constant(0.75)
    assert linf_dist(u, u) == 0.0
    assert l1_dist(u, w) == pytest.approx(0.5)
    assert linf_dist(u, w) == pytest.approx(0.5)
    assert cut_norm_exact(kernel_sub(u, w)) == pytest.approx(0.5)
    with pytest.raises(MassMismatchError):
        linf_dist(u, two_block((0.5, 0.5), 0.2, 0.2, 0.2))


def test_norm_ordering(rng):
    for _ in range(10):
        u, w = random_graphon_pair(rng, int(rng.integers(1, 6)))
        cut = cut_norm_exact(kernel_sub(u, w))
        l1 = l1_dist(u, w)
        linf = linf_dist(u, w)
        assert cut <= l1 + 1e-12
        assert l1 <= linf + 1e-12


def test_cut_distance_perm():
    w1 = StepGraphon([0.5, 0.5], [[0.9, 0.2], [0.2, 0.4]])
    w2 = StepGraphon([0.5, 0.5], [[0.4, 0.2], [0.2, 0.9]])
    assert cut_distance_perm(w1, w2) == pytest.approx(0.0, abs=1e-15)
    assert cut_distance_perm(constant(0.3), constant(0.8)) == pytest.approx(0.5)
    direct = cut_norm_exact(kernel_sub(w1, w2))
    assert 0.0 <= cut_distance_perm(w1, w2) <= direct + 1e-15
    with pytest.raises(MassMismatchError):
        cut_distance_perm(constant(0.5), two_block((0.5, 0.5), 0.5, 0.5, 0.5))
    big = StepGraphon(np.full(9, 1 / 9), np.full((9, 9), 0.5))
    with pytest.raises(GuardExceededError):
        cut_distance_perm(big, big)


def test_sample_graph_extremes_and_concentration():
    gen = substream(5, "sample")
    complete = sample_graph(40, constant(1.0), gen)
    assert complete.edge_count() == comb(40, 2)
    empty = sample_graph(40, constant(0.0), gen)
    assert empty.edge_count() == 0
    n = 1000
    g = sample_graph(n, constant(0.3), substream(7, "sample"))
    dens = g.edge_count() / comb(n, 2)
    sigma = (0.3 * 0.7 / comb(n, 2)) ** 0.5
    assert abs(dens - 0.3) <= 4 * sigma
    tb = two_block((0.3, 0.7), 0.9, 0.1, 0.5)
    g = sample_graph(500, tb, substream(8, "sample"))
    assert g.num_parts == 2
    counts = np.bincount(g.part_of)
    assert abs(counts[0] / 500 - 0.3) < 0.1


def test_stepped_conventions():
    n = 9
    g = SimGraph(n, part_of=[0] * 4 + [1] * 5)
    for u in range(n):
        for v in range(u + 1, n):
            g.add_edge(u, v)
    w = stepped(g)
    assert w.values[0, 0] == pytest.approx(1 - 1 / 4)
    assert w.values[1, 1] == pytest.approx(1 - 1 / 5)
    assert w.values[0, 1] == pytest.approx(1.0)
    assert np.allclose(w.masses, [4 / 9, 5 / 9])
    empty = SimGraph(6, part_of=[0, 0, 0, 1, 1, 1])
    assert np.all(stepped(empty).values == 0.0)
    with pytest.raises(ValueError):
        stepped(SimGraph(3, part_of=[0, 0, 2]))


def test_stepped_concentration():
    n = 2000
    g = sample_graph(n, two_block((0.5, 0.5), 0.5, 0.5, 0.5), substream(11, "s"))
    w = stepped(g)
    assert np.all(np.abs(w.values - 0.5) < 0.01)


def test_stepped_respects_target_masses():
    g = sample_graph(400, two_block((0.5, 0.5), 0.7, 0.2, 0.4), substream(12, "s"))
    w = stepped(g, target_masses=(0.5, 0.5))
    assert np.allclose(w.masses, [0.5, 0.5])


def test_discrete_error_bound():
    # vertex-level graphon representation vs exact induced pattern
    # frequencies over ordered tuples of distinct vertices
    n, k = 24, 3
    g = sample_graph(n, constant(0.5), substream(21, "s"))
    g.part_of = list(range(n))  # one part per vertex
    w = stepped(g)
    counts = {f: 0 for f in range(8)}
    for tup in itertools.permutations(range(n), k):
        counts[induced_pattern(g, tup).edges] += 1
    total = n * (n - 1) * (n - 2)
    for f in enumerate_graphs(k):
        exact = counts[f.edges] / total
        approx = induced_density(f, w)
        assert abs(approx - exact) <= comb(k, 2) / n + 1e-12


def test_graphon_file_round_trip(tmp_path):
    w = two_block((0.25, 0.75), 0.9, 0.1, 0.3)
    path = tmp_path / "graphon.json"
    save_graphon(w, path)
    loaded = load_graphon(path)
    assert np.allclose(loaded.masses, w.masses)
    assert np.allclose(loaded.values, w.values)
    bad = tmp_path / "bad.json"
    bad.write_text('{"masses": [0.5, 0.5], "values": [[2.0, 0.1], [0.1, 0.2]]}')
    with pytest.raises(ValueError):
        load_graphon(bad)


def test_sim_graph_file_round_trip(tmp_path):
    g = sample_graph(30, two_block((0.5, 0.5), 0.8, 0.2, 0.5), substream(3, "io"))
    path = tmp_path / "graph.txt"
    save_sim_graph(g, path)
    loaded = load_sim_graph(path)
    assert loaded.rows == g.rows
    assert loaded.part_of == g.part_of
    first = path.read_text().splitlines()[0].split()
    assert int(first[0]) < int(first[1])  # 1-based, u < v
