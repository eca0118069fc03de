import math
from fractions import Fraction

import numpy as np
import pytest

from oracles import block_homs_brute
from spinz.blowup import (
    build_blowup_host,
    concentration_experiment,
    count_all_block_homs,
    count_block_homs,
    sample_subgraph,
    scale_edge_weights,
)
from spinz.counting import count_list_homs, ListAssignment
from spinz.graphs import Graph, cycle_graph, path_graph
from spinz.weights import WeightError, WeightSystem, make_hardcore


def uniform_half_weights(g, m=2):
    return WeightSystem.build(
        g,
        m,
        edge={
            (u, v, i, j): Fraction(1, 2)
            for u, v in g.edges
            for i in range(1, m + 1)
            for j in range(i, m + 1)
        },
    )


def test_scale_leaves_subunit_weights_alone():
    g = cycle_graph(4)
    w = uniform_half_weights(g)
    scaled, factor = scale_edge_weights(w)
    assert factor == 1
    assert scaled is w


def test_scale_divides_by_the_maximum():
    g = cycle_graph(4)
    w = WeightSystem.build(g, 2, edge={(0, 1, 1, 1): 5, (1, 2, 1, 2): 2})
    scaled, factor = scale_edge_weights(w)
    assert factor == 5
    assert scaled.edge_weight(0, 1, 1, 1).fraction == 1
    assert scaled.edge_weight(1, 2, 1, 2).fraction == Fraction(2, 5)
    _, emax = scaled.edge_extremes()
    assert emax == 1


def test_build_host_trivial_blowup():
    g = cycle_graph(4)
    w = WeightSystem.build(g, 2)
    host = build_blowup_host(g, w, 1)
    assert host.total_vertices == 8  # two singleton blocks per vertex
    assert host.block_size == ((1, 1),) * 4


def test_build_host_rejects_fractional_blocks():
    g = cycle_graph(4)
    w = WeightSystem.build(g, 2, vertex={(0, 1): Fraction(1, 2)})
    with pytest.raises(WeightError, match="not an integer"):
        build_blowup_host(g, w, 1)
    build_blowup_host(g, w, 2)  # C=2 clears the denominator


def test_build_host_rejects_zero_and_oversized_weights():
    g = cycle_graph(4)
    with pytest.raises(WeightError, match="zero"):
        build_blowup_host(g, make_hardcore(g, 1), 1)
    w = WeightSystem.build(g, 2, edge={(0, 1, 1, 1): 3})
    with pytest.raises(WeightError, match="outside"):
        build_blowup_host(g, w, 1)


def test_sample_probability_one_keeps_everything():
    g = cycle_graph(4)
    host = build_blowup_host(g, WeightSystem.build(g, 2), 3)
    for seed in (0, 1, 99):
        sub = sample_subgraph(host, seed)
        assert all(mat.all() for mat in sub.keep.values())


def test_sample_fixed_seed_is_bit_identical():
    g = cycle_graph(4)
    host = build_blowup_host(g, uniform_half_weights(g), 4)
    s1 = sample_subgraph(host, 1234)
    s2 = sample_subgraph(host, 1234)
    for e in host.graph.edges:
        assert np.array_equal(s1.keep[e], s2.keep[e])
    s3 = sample_subgraph(host, 1235)
    assert any(not np.array_equal(s1.keep[e], s3.keep[e]) for e in host.graph.edges)


def test_sample_edge_retention_rate():
    g = Graph(2, [(0, 1)])
    w = uniform_half_weights(g)
    host = build_blowup_host(g, w, 8)
    total = 0
    draws = 0
    for seed in range(300):
        keep = sample_subgraph(host, seed).keep[(0, 1)]
        total += int(keep.sum())
        draws += keep.size
    p = 0.5
    se = math.sqrt(draws * p * (1 - p))
    assert abs(total - draws * p) <= 4 * se


def test_count_block_homs_full_host_product_formula():
    g = cycle_graph(4)
    w = WeightSystem.build(g, 2, vertex={(0, 1): 2, (2, 2): 3})
    host = build_blowup_host(g, w, 2)
    sub = sample_subgraph(host, 7)  # probabilities 1: identical to the host
    for cfg in [(1, 1, 1, 1), (1, 2, 2, 1), (2, 2, 2, 2)]:
        expected = 1
        for v in range(4):
            expected *= host.block_size[v][cfg[v] - 1]
        assert count_block_homs(g, sub, host, cfg) == expected


def test_count_block_homs_single_edge_counts_survivors():
    g = Graph(2, [(0, 1)])
    host = build_blowup_host(g, uniform_half_weights(g), 5)
    sub = sample_subgraph(host, 3)
    rows = host.local_block_slice(0, 1)
    cols = host.local_block_slice(1, 1)
    assert count_block_homs(g, sub, host, (1, 1)) == int(sub.keep[(0, 1)][rows, cols].sum())


def test_count_block_homs_matches_brute_force():
    g = cycle_graph(4)
    host = build_blowup_host(g, uniform_half_weights(g), 3)
    for seed in range(5):
        sub = sample_subgraph(host, seed)
        for cfg in [(1, 1, 1, 1), (2, 1, 2, 1), (1, 2, 2, 2)]:
            blocks = {
                v: range(
                    host.local_block_slice(v, cfg[v]).start,
                    host.local_block_slice(v, cfg[v]).stop,
                )
                for v in range(4)
            }
            brute = block_homs_brute(4, g.edges, blocks, sub.keep)
            assert count_block_homs(g, sub, host, cfg) == brute


def test_block_homs_partition_the_list_homomorphisms():
    # summing over all block selections recovers the unrestricted count
    import itertools

    for n, edges in [(3, [(0, 1), (1, 2)]), (4, [(0, 1), (1, 2), (2, 3), (0, 3)])]:
        g = Graph(n, edges)
        w = uniform_half_weights(g)
        host = build_blowup_host(g, w, 3)
        sub = sample_subgraph(host, 11)
        total = sum(
            count_block_homs(g, sub, host, cfg)
            for cfg in itertools.product((1, 2), repeat=n)
        )
        assert total == count_all_block_homs(g, sub, host)


def test_count_all_matches_backtracking_on_host_graph():
    # cross-check the elimination engine against the generic list-hom
    # counter on an explicit host graph
    g = path_graph(3)
    w = uniform_half_weights(g)
    host = build_blowup_host(g, w, 2)
    sub = sample_subgraph(host, 21)
    edges = []
    for (u, v), keep in sub.keep.items():
        for x in range(keep.shape[0]):
            for y in range(keep.shape[1]):
                if keep[x, y]:
                    edges.append(
                        (host.vertex_start[u] + x, host.vertex_start[v] + y)
                    )
    hgraph = Graph(host.total_vertices, edges) if edges else None
    if hgraph is None:
        assert count_all_block_homs(g, sub, host) == 0
        return
    lists = ListAssignment(
        g.n,
        [
            range(host.vertex_start[v], host.vertex_start[v] + host.vertex_size[v])
            for v in range(g.n)
        ],
    )
    assert count_all_block_homs(g, sub, host) == count_list_homs(g, hgraph, lists)


def test_blowup_runs_on_restricted_kab_instances():
    # the per-vertex restriction of a base instance is itself a graph plus
    # weights, so the same host/count machinery covers the K_{a,b} side
    from spinz.graphs import bipartition, certify_biregular
    from spinz.weights import restrict_to_kab

    g = cycle_graph(4)
    w = uniform_half_weights(g)
    cert = certify_biregular(g, bipartition(g))
    inst = restrict_to_kab(g, w, cert, sorted(cert.odd)[0])
    host = build_blowup_host(inst.graph, inst.weights, 3)
    sub = sample_subgraph(host, 42)
    import itertools

    total = sum(
        count_block_homs(inst.graph, sub, host, cfg)
        for cfg in itertools.product((1, 2), repeat=inst.graph.n)
    )
    assert total == count_all_block_homs(inst.graph, sub, host)


def test_experiment_all_ones_is_deterministic_unity():
    g = cycle_graph(4)
    w = WeightSystem.build(g, 2)
    stats = concentration_experiment(g, w, (1, 1, 1, 1), 1, 5, seed=0)
    assert stats.samples == (1, 1, 1, 1, 1)
    assert stats.mu == 1
    assert stats.emp_var == 0.0
    assert stats.alpha == 17  # 1 + N^2 with every weight 1
    assert stats.threshold_C == Fraction(48)
    assert stats.error_guarantee() is None  # C = 1 is below alpha


def test_error_guarantee_shrinks_with_scale():
    g = cycle_graph(4)
    w = WeightSystem.build(g, 2)
    s100 = concentration_experiment(g, w, (1, 1, 1, 1), 100, 2, seed=0)
    s400 = concentration_experiment(g, w, (1, 1, 1, 1), 400, 2, seed=0)
    d100, d400 = s100.error_guarantee(), s400.error_guarantee()
    assert d100 is not None and d400 is not None
    assert 0 < d400 < d100
    root_alpha = math.sqrt(17)
    assert d100 == pytest.approx(root_alpha / (10 - root_alpha))


def test_experiment_mean_and_variance_bounds():
    g = cycle_graph(4)
    w = uniform_half_weights(g)
    stats = concentration_experiment(g, w, (1, 1, 1, 1), 10, 200, seed=5)
    mu = float(stats.mu)
    assert mu == 10 ** 4 / 16
    se = math.sqrt(stats.emp_var / stats.trials)
    assert abs(stats.emp_mean - mu) <= 4 * se
    assert stats.relative_var() <= 1.5 * float(stats.alpha) / 100
    assert stats.alpha == 272  # 16 + 16 * 16 for half-weight edges on C4


def test_experiment_is_bit_reproducible():
    g = cycle_graph(4)
    w = uniform_half_weights(g)
    s1 = concentration_experiment(g, w, (1, 2, 1, 2), 4, 50, seed=77, threads=1)
    s2 = concentration_experiment(g, w, (1, 2, 1, 2), 4, 50, seed=77, threads=4)
    assert s1.samples == s2.samples
    assert s1.to_json_dict() == s2.to_json_dict()


def test_experiment_requires_two_trials():
    g = cycle_graph(4)
    with pytest.raises(ValueError, match="trials"):
        concentration_experiment(g, WeightSystem.build(g, 2), (1, 1, 1, 1), 1, 1, seed=0)


def test_experiment_scales_oversized_edge_weights():
    g = cycle_graph(4)
    w = WeightSystem.build(
        g, 2, edge={(u, v, i, j): 2 for u, v in g.edges for i in (1, 2) for j in (1, 2) if i <= j}
    )
    stats = concentration_experiment(g, w, (1, 1, 1, 1), 2, 10, seed=1)
    assert stats.edge_scale == 2
    # scaled probabilities are 1, so every sample is the full block product
    assert set(stats.samples) == {2 ** 4}
    assert stats.mu == 16
