import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swaptree import (GreedyBudget, LeveledEdge, LeveledTree, MaintainerConfig, OnlineMetric, check_valid,
                      cost, find_improving_swap, gen_euclidean, gen_graph, gen_spider, make_maintainer, rescale,
                      run_instance)
from swaptree.maintainers import swap_allowance

from conftest import bridge_spec, line_spec


def traces(mt):
    return [r.to_json() for r in mt.reports]


def test_config_defaults_and_validation():
    c = MaintainerConfig()
    assert c.k == 72 and c.period == 1
    assert MaintainerConfig("delta", delta=0.25).period == 4
    assert MaintainerConfig(K=3).k == 3
    for bad in [dict(algorithm="x"), dict(alpha=5), dict(epsilon=0), dict(epsilon=1.5), dict(delta=0.3),
                dict(K=0)]:
        with pytest.raises(ValueError):
            MaintainerConfig(**bad)


def test_constant_line_instance():
    mt = run_instance(line_spec([0, 13, 100]), MaintainerConfig("constant"), verify="full")
    r1, r2 = mt.reports
    assert (len(r1.trace.added), r1.swap_count) == (1, 0)
    assert (len(r2.trace.added), r2.swap_count, r2.tree_cost) == (1, 0, 100)
    assert r2.dual_lb == 35 and r2.weight_rank == 7


def test_root_only_run():
    mt = make_maintainer(MaintainerConfig("single"))
    assert mt.on_arrival([]) is None
    assert mt.reports == [] and mt.tree.n_vertices == 1


@pytest.mark.parametrize("alg", ["single", "delta"])
def test_single_without_lag_never_swaps(alg):
    mt = run_instance(rescale(gen_euclidean(40, seed=4), 6), MaintainerConfig(alg), verify="full")
    assert mt.cum_swaps == 0
    assert all(len(r.trace.added) == 1 for r in mt.reports)


@pytest.mark.parametrize("K", [1, 2, 3])
def test_single_swaps_on_bridge(K):
    # the far point starts at rank 3 and ends at rank 0
    mt = run_instance(bridge_spec(6048, 63), MaintainerConfig("single", K=K), verify="full")
    assert mt.cum_swaps >= 1
    for r in mt.reports:
        assert r.swap_count <= 1 and len(r.trace.added) <= 2 and len(r.trace.removed) <= 1
        assert r.vrank_shift in (0, K)


def test_constant_swaps_on_bridge():
    mt = run_instance(bridge_spec(), MaintainerConfig("constant"), verify="full")
    assert mt.cum_swaps >= 1
    assert mt.vrank == mt.rank


def test_delta_one_matches_single():
    spec = bridge_spec()
    a = run_instance(spec, MaintainerConfig("single", K=2), verify="full")
    b = run_instance(spec, MaintainerConfig("delta", K=2, delta=1), verify="full")
    assert [{**x, "algorithm": None} for x in traces(a)] == [{**x, "algorithm": None} for x in traces(b)]


@pytest.mark.parametrize("delta", [0.5, 0.25])
def test_delta_inactive_rounds_and_total(delta):
    # rank 4 down to 0, the last drop landing on round 248
    mt = run_instance(bridge_spec(15624, 63), MaintainerConfig("delta", K=1, delta=delta), verify="full")
    period = round(1 / delta)
    assert mt.cum_swaps >= 1
    for r in mt.reports:
        if r.round % period:
            assert r.swap_count == 0
        assert r.cum_swaps <= math.floor(delta * r.round)


def greedy(xs, eps, strict=False):
    mt = GreedyBudget(MaintainerConfig("greedy", epsilon=eps, strict=strict), track_ranks=False, verify="full")
    mt.run(line_spec(xs).arrivals())
    return mt


def test_greedy_swaps_when_half_epsilon():
    mt = greedy([0, 10, 5.5], 0.5)
    assert mt.reports[-1].trace.added[0].key == (1, 2)
    assert sorted(mt.tree.edges) == [(0, 2), (1, 2)]
    assert cost(mt.tree) == 10 and mt.cum_swaps == 1


def test_greedy_no_swap_when_epsilon_one():
    mt = greedy([0, 10, 5.5], 1.0)
    assert mt.cum_swaps == 0 and cost(mt.tree) == 14.5


def test_greedy_exact_ratio_swaps_unless_strict():
    # tree edge 10 against candidate 5 is exactly a factor 2
    assert greedy([0, 10, 5], 1.0).cum_swaps == 1
    assert greedy([0, 10, 5], 1.0, strict=True).cum_swaps == 0


def test_find_improving_swap_cases():
    m = OnlineMetric.from_matrix(np.array([[0, 10, 5.5], [10, 0, 4.5], [5.5, 4.5, 0]]))
    T = LeveledTree(n_vertices=3)
    T.add_edge(LeveledEdge(0, 1, 10.0, 1))
    T.add_edge(LeveledEdge(1, 2, 4.5, 1))
    assert find_improving_swap(T, m, 0.5) == ((0, 1), (0, 2))
    # star around 0 that is already the MST
    star = OnlineMetric.from_matrix(np.array([[0, 1, 1, 1], [1, 0, 2, 2], [1, 2, 0, 2], [1, 2, 2, 0]]))
    S = LeveledTree(n_vertices=4)
    for v in (1, 2, 3):
        S.add_edge(LeveledEdge(0, v, 1, 1))
    assert find_improving_swap(S, star, 1.0) is None


def test_find_improving_swap_prefers_largest_ratio():
    # path 0-1-2-3 with lengths 30, 10, 20; chord 0-2 improves by 30/21, chord 1-3 by 20/10
    D = np.array([
        [0, 30, 21, 35],
        [30, 0, 10, 10],
        [21, 10, 0, 20],
        [35, 10, 20, 0],
    ], dtype=float)
    m = OnlineMetric.from_matrix(D)
    T = LeveledTree(n_vertices=4)
    for u, v in [(0, 1), (1, 2), (2, 3)]:
        T.add_edge(LeveledEdge(u, v, D[u, v], 1))
    assert find_improving_swap(T, m, 0.25) == ((2, 3), (1, 3))


def test_swap_allowance_exact():
    assert swap_allowance(1, 1) == 2
    assert swap_allowance(5, 1) == 10
    assert swap_allowance(3, 0.5) == 10  # 1.5**10 < 64 < 1.5**11
    assert Fraction(5, 4) ** swap_allowance(4, 0.25) <= 4 ** 4 < Fraction(5, 4) ** (swap_allowance(4, 0.25) + 1)


def test_greedy_quiescent_cost():
    spec = rescale(gen_euclidean(30, seed=2), 6)
    mt = run_instance(spec, MaintainerConfig("greedy", epsilon=0.25), verify="full")
    assert all(r.tree_cost <= 1.25 * r.mst_cost * (1 + 1e-12) for r in mt.reports)


@pytest.mark.parametrize("k", [1, 2, 4])
def test_greedy_attach_lengths_on_spider(k):
    spec = rescale(gen_spider(k), 6)
    mt = run_instance(spec, MaintainerConfig("greedy"), verify="full")
    firsts = [r.trace.added[0].length // spec.scale for r in mt.reports]
    assert firsts == [8] * (k - 1) + [4] * k + [2] * k + [2] + [1] * k


@given(st.integers(0, 5000), st.sampled_from(["constant", "single", "delta", "greedy"]),
       st.sampled_from([None, 1, 2]))
def test_full_verification_on_random_graphs(seed, alg, K):
    spec = rescale(gen_graph(14, 10, seed=seed), 6)
    cfg = MaintainerConfig(alg, K=K, delta=0.5 if alg == "delta" else 1.0)
    mt = run_instance(spec, cfg, verify="full")
    assert mt.tree.is_spanning()
    if alg != "greedy":
        assert check_valid(mt.tree, mt.vrank, 6, mt.metric)


@given(st.integers(0, 5000), st.sampled_from([6.0, 7.5]))
def test_full_verification_other_alpha(seed, alpha):
    spec = rescale(gen_euclidean(25, seed=seed), alpha)
    for alg in ("constant", "single"):
        run_instance(spec, MaintainerConfig(alg, alpha=alpha, K=1), verify="full")


def test_reruns_identical():
    spec = rescale(gen_graph(16, 12, seed=9), 6)
    for alg in ("constant", "single", "delta", "greedy"):
        a = run_instance(spec, MaintainerConfig(alg))
        b = run_instance(spec, MaintainerConfig(alg))
        assert traces(a) == traces(b)


def test_greedy_invariant_under_rescale():
    spec = gen_graph(12, 10, seed=3)
    a = run_instance(rescale(spec, 6), MaintainerConfig("greedy"), track_ranks=False)
    b = run_instance(rescale(rescale(spec, 6), 9), MaintainerConfig("greedy"), track_ranks=False)
    keys = lambda mt: [([e.key for e in r.trace.added], [e.key for e in r.trace.removed]) for r in mt.reports]
    assert keys(a) == keys(b)


@given(st.integers(0, 10_000), st.integers(1, 35))
def test_bottleneck_matrix_matches_path_maximum(seed, n):
    from swaptree.maintainers import bottleneck_matrix

    rng = np.random.default_rng(seed)
    X = rng.random((n, 2))
    D = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))
    T = LeveledTree(n_vertices=n)
    for v in range(1, n):
        u = int(rng.integers(v))
        T.add_edge(LeveledEdge(u, v, D[u, v], 1))
    B = bottleneck_matrix(T, D)
    for a in range(n):
        for b in range(n):
            assert B[a, b] == max((D[x, y] for x, y in T.path(a, b)), default=0)
