import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swaptree import (LeveledEdge, LeveledTree, OnlineMetric, SwapTrace, attach_new_vertex, check_valid,
                      cost, decrement_head)
from swaptree.errors import NoReplacementEdge, ValidityBroken
from swaptree.ranks import KSTEP, UNIT

INF = math.inf


def tree_with(n, edges, m, variant=UNIT, K=1):
    T = LeveledTree(variant, K, n_vertices=n)
    for u, v, level in edges:
        T.add_edge(LeveledEdge(u, v, m.distance(u, v), level, lineage=max(u, v)))
    return T


@pytest.fixture
def four_points():
    # 0-1 is the only long edge; 2 sits 20 from 1 and 60 from 3, which sits 30 from 0
    D = np.array([
        [0, 100, 85, 30],
        [100, 0, 20, 75],
        [85, 20, 0, 60],
        [30, 75, 60, 0],
    ])
    return OnlineMetric.from_matrix(D)


def test_attach_line_instance(line_metric):
    T = LeveledTree(UNIT, 1, n_vertices=0)
    assert attach_new_vertex(T, line_metric, 0, INF, 6).added == []
    e1 = attach_new_vertex(T, line_metric, 1, 0, 6).added[0]
    assert (e1.key, e1.length, e1.level) == ((0, 1), 13.0, 1)
    e2 = attach_new_vertex(T, line_metric, 2, 1, 6).added[0]
    assert (e2.key, e2.length, e2.level) == ((1, 2), 87.0, 2)
    assert cost(T) == 100
    assert check_valid(T, [INF, 0, 1], 6, line_metric)


def test_attach_level_kstep():
    T = LeveledTree(KSTEP, 72)
    assert T.attach_level(1) == 1
    assert T.attach_level(72) == 2


def test_attach_out_of_order_rejected(line_metric):
    T = LeveledTree(UNIT, 1, n_vertices=0)
    with pytest.raises(ValidityBroken):
        attach_new_vertex(T, line_metric, 1, 0, 6)


def test_valid_examples(line_metric):
    T = LeveledTree(UNIT, 1, n_vertices=2)
    T.add_edge(LeveledEdge(0, 1, 13.0, 1))
    assert check_valid(T, [INF, 0], 6)
    assert check_valid(LeveledTree(UNIT, 1, n_vertices=1), [INF], 6)
    assert cost(LeveledTree(UNIT, 1, n_vertices=1)) == 0


def test_length_bound_violation_reported():
    T = LeveledTree(UNIT, 1, n_vertices=2)
    T.add_edge(LeveledEdge(0, 1, 73, 1))
    rep = check_valid(T, [INF, 5], 6)
    assert [v[0] for v in rep.violations] == ["length-bound"]


def test_head_violation_reported(four_points):
    T = tree_with(4, [(0, 1, 2), (1, 2, 1), (0, 3, 1)], four_points)
    assert check_valid(T, [INF, 1, 0, 0], 6, four_points)  # {1,2} at level 1 is headed by 1
    rep = check_valid(T, [INF, 0, 0, 0], 6, four_points)
    assert [v[0] for v in rep.violations] == ["head"]


def test_singletons_need_qualifying_heads(line_metric):
    # vertex 2 sits alone at level 1 and must carry b >= 1
    T = tree_with(3, [(0, 1, 1), (1, 2, 2)], line_metric)
    assert check_valid(T, [INF, 0, 1], 6, line_metric)
    assert not check_valid(T, [INF, 0, 0], 6, line_metric)


def test_decrement_no_op_when_not_a_head(line_metric):
    T = tree_with(3, [(0, 1, 1), (1, 2, 2)], line_metric)
    assert len(decrement_head(T, line_metric, 1, [INF, 1, 1], [INF, 0, 1], 6)) == 0


def test_decrement_two_components(four_points):
    m = four_points
    T = tree_with(4, [(0, 1, 2), (1, 2, 1), (0, 3, 1)], m)
    b_old, b_new = [INF, 1, 0, 0], [INF, 0, 0, 0]
    assert check_valid(T, b_old, 6, m)
    before = cost(T)
    tr = decrement_head(T, m, 1, b_old, b_new, 6)
    assert [e.key for e in tr.added] == [(2, 3)]
    assert [e.key for e in tr.removed] == [(0, 1)]
    assert tr.swaps == 1
    assert check_valid(T, b_new, 6, m)
    assert cost(T) == before + 60 - 100


def test_decrement_leaf_reattaches_to_neighbour():
    m = OnlineMetric.from_matrix(np.array([[0, 30, 100], [30, 0, 70], [100, 70, 0]]))
    T = tree_with(3, [(0, 1, 1), (0, 2, 2)], m)
    tr = decrement_head(T, m, 2, [INF, 0, 1], [INF, 0, 0], 6)
    assert [e.key for e in tr.added] == [(1, 2)]
    assert len(tr.removed) == 1
    assert check_valid(T, [INF, 0, 0], 6, m)


def test_decrement_relevels_existing_edge():
    m = OnlineMetric.from_matrix(np.array([[0, 30, 70], [30, 0, 90], [70, 90, 0]]))
    T = tree_with(3, [(0, 1, 1), (0, 2, 2)], m)
    tr = decrement_head(T, m, 2, [INF, 0, 1], [INF, 0, 0], 6)
    assert tr.swaps == 0 and [e.key for e in tr.relabeled] == [(0, 2)]
    assert T.edges[(0, 2)].level == 1
    assert check_valid(T, [INF, 0, 0], 6, m)


def test_decrement_without_close_vertex_fails():
    m = OnlineMetric.from_matrix(np.array([[0, 30, 100], [30, 0, 90], [100, 90, 0]]))
    T = tree_with(3, [(0, 1, 1), (0, 2, 2)], m)
    with pytest.raises(NoReplacementEdge):
        decrement_head(T, m, 2, [INF, 0, 1], [INF, 0, 0], 6)


def test_decrement_requires_one_step(four_points):
    T = tree_with(4, [(0, 1, 2), (1, 2, 1), (0, 3, 1)], four_points)
    with pytest.raises(ValidityBroken):
        decrement_head(T, four_points, 1, [INF, 2, 0, 0], [INF, 0, 0, 0], 6)


def test_kstep_decrement():
    # K = 2: level 1 covers unit levels 1..2 and edges up to 2*6**3
    m = OnlineMetric.from_matrix(np.array([[0, 100, 480], [100, 0, 400], [480, 400, 0]]))
    T = tree_with(3, [(0, 1, 1), (0, 2, 2)], m, KSTEP, 2)
    assert check_valid(T, [INF, 0, 2], 6, m)
    tr = decrement_head(T, m, 2, [INF, 0, 2], [INF, 0, 0], 6)
    assert tr.swaps == 1 and [e.key for e in tr.added] == [(1, 2)]
    assert check_valid(T, [INF, 0, 0], 6, m)


def test_trace_bookkeeping(four_points):
    m = four_points
    T = tree_with(4, [(0, 1, 2), (1, 2, 1), (0, 3, 1)], m)
    copy = T.copy()
    before = cost(T)
    tr = decrement_head(T, m, 1, [INF, 1, 0, 0], [INF, 0, 0, 0], 6)
    assert cost(T) == before + sum(e.length for e in tr.added) - sum(e.length for e in tr.removed)
    copy.apply(tr)
    assert copy.edges == T.edges


def test_path_and_components(four_points):
    T = tree_with(4, [(0, 1, 2), (1, 2, 1), (0, 3, 1)], four_points)
    assert T.path(3, 2) == [(0, 3), (0, 1), (1, 2)]
    assert T.components(1) == [0, 1, 1, 0]
    assert T.is_spanning()
    T.remove_edge((0, 1))
    assert not T.is_spanning()


@given(st.integers(0, 5000), st.integers(3, 25))
def test_random_decrements_keep_validity(seed, n):
    """Lower random heads one unit at a time, repairing each time, on a valid starting tree."""
    rng = np.random.default_rng(seed)
    X = rng.random((n, 2)) * 3000
    D = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))
    if D[~np.eye(n, dtype=bool)].min() < 12:
        return
    from swaptree import run_clustering

    m = OnlineMetric()
    T = LeveledTree(UNIT, 1, n_vertices=0)
    b = []
    for i in range(n):
        m.add_point(D[i, :i])
        h = run_clustering(m, 6)
        attach_new_vertex(T, m, i, h.init_rank, 6)
        b.append(h.init_rank)
        # catch up fully to the current ranks, one unit at a time
        for j in range(1, i):
            while b[j] > h.ranks[j]:
                b_new = list(b)
                b_new[j] -= 1
                tr = decrement_head(T, m, j, b, b_new, 6)
                assert len(tr.added) <= 1 and len(tr.removed) <= 1
                b = b_new
                assert check_valid(T, b, 6, m), check_valid(T, b, 6, m).violations
