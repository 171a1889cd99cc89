"""Discrete-phase single-linkage clustering of one round.

Phase 0 is all singletons. Phase ``t >= 1`` merges, until none remain, any
two clusters closer than ``2 * alpha**(t+1)``. A cluster's leader is its
smallest id, and a vertex's rank is the last phase in which it leads its
cluster (the root's rank is infinite).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree

from .errors import MinDistanceViolation, UnknownPoint
from .metric import OnlineMetric
from .numeric import INF, exact, threshold

DEFAULT_ALPHA = 6.0


@dataclass(frozen=True)
class PhaseClustering:
    """Partition of ``[i]`` at the end of one phase.

    ``leader[v]`` is the leader (least id) of the part containing ``v``, so
    the tuple doubles as a canonical label array.
    """

    phase: int
    leader: tuple

    @property
    def size(self) -> int:
        return len(self.leader)

    @property
    def parts(self) -> list[frozenset]:
        groups: dict[int, list[int]] = {}
        for v, lead in enumerate(self.leader):
            groups.setdefault(lead, []).append(v)
        return [frozenset(groups[k]) for k in sorted(groups)]

    @property
    def n_parts(self) -> int:
        return len(set(self.leader))

    def part_of(self, v: int) -> frozenset:
        lead = self.leader[v]
        return frozenset(u for u, l in enumerate(self.leader) if l == lead)

    def is_leader(self, v: int) -> bool:
        return self.leader[v] == v

    @classmethod
    def singletons(cls, size: int) -> "PhaseClustering":
        return cls(0, tuple(range(size)))

    @classmethod
    def from_parts(cls, phase: int, parts: Iterable[Iterable[int]], size: int) -> "PhaseClustering":
        leader = [-1] * size
        for part in parts:
            part = list(part)
            lead = min(part)
            for v in part:
                leader[v] = lead
        if -1 in leader:
            raise ValueError("parts do not cover every vertex")
        return cls(phase, tuple(leader))


def _min_root_union_find(leader: Sequence[int]):
    parent = list(leader)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            # keep the smaller id as root so roots are leaders
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb

    return find, union


def below(values: np.ndarray, thr) -> np.ndarray:
    """Elementwise ``values < thr`` with ``thr`` an exact int or Fraction.

    A float can only be misjudged when it equals ``float(thr)``, so just
    those entries are settled in exact arithmetic.
    """
    if values.dtype.kind in "iu" and isinstance(thr, int):
        if thr > np.iinfo(values.dtype).max:
            return np.ones(values.shape, dtype=bool)
        return values < thr
    thr_f = float(thr)
    out = values < thr_f
    tie = values == thr_f
    if tie.any():
        for idx in zip(*np.nonzero(tie)):
            out[idx] = exact(values[idx].item()) < thr
    return out


def merge_phase(prev: PhaseClustering, m: OnlineMetric, threshold_value, pairs=None) -> PhaseClustering:
    """Merge parts of ``prev`` closer than ``threshold_value`` to a fixed point.

    A merged part is close to a third part only if one of its pieces was, so
    one union-find pass over all sub-threshold point pairs already reaches
    the fixed point. ``pairs`` restricts the scan to candidate pairs (for
    example spanning-tree edges, which give the same components).
    """
    size = prev.size
    find, union = _min_root_union_find(prev.leader)
    D = m.restricted(size)
    thr = exact(threshold_value)
    if pairs is None:
        a, b = np.nonzero(np.triu(below(D, thr), k=1))
    else:
        P = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        keep = below(D[P[:, 0], P[:, 1]], thr)
        a, b = P[keep, 0], P[keep, 1]
    for u, v in zip(a.tolist(), b.tolist()):
        union(u, v)
    return PhaseClustering(prev.phase + 1, tuple(find(v) for v in range(size)))


@dataclass(frozen=True)
class ClusterHistory:
    round: int
    alpha: float
    phases: tuple
    ranks: tuple = field(repr=False)

    @property
    def init_rank(self):
        """Rank of the newest vertex, i.e. its Init value."""
        return self.ranks[self.round]

    def threshold(self, t: int):
        return threshold(self.alpha, t + 1)


def spanning_pairs(D: np.ndarray) -> list[tuple[int, int]]:
    """Edges of a minimum spanning tree of a dense positive distance table."""
    if len(D) < 2:
        return []
    mst = minimum_spanning_tree(np.asarray(D, dtype=np.float64)).tocoo()
    return sorted(zip(mst.row.tolist(), mst.col.tolist()))


def extend_spanning_pairs(D: np.ndarray, pairs) -> list[tuple[int, int]]:
    """MST edges of all ``len(D)`` points, given MST edges of the first ``len(D)-1``.

    By the cycle property the new tree uses only old tree edges and edges at
    the new point, so Kruskal over those ``2n - 3`` candidates suffices.
    """
    n = len(D)
    if n < 2:
        return []
    new = n - 1
    cand = list(pairs) + [(j, new) for j in range(new)]
    P = np.asarray(cand, dtype=np.int64)
    order = np.argsort(D[P[:, 0], P[:, 1]], kind="stable")
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    out = []
    for k in order.tolist():
        u, v = cand[k]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            out.append((u, v))
            if len(out) == n - 1:
                break
    return sorted(out)


def ranks_from_phases(phases: Sequence[PhaseClustering]) -> tuple:
    size = phases[0].size
    ranks = [INF] + [0] * (size - 1)
    for t, ph in enumerate(phases):
        for v in range(1, size):
            if ph.leader[v] == v:
                ranks[v] = t
    return tuple(ranks)


def run_clustering(m: OnlineMetric, alpha=DEFAULT_ALPHA, i: int | None = None,
                   pairs=None) -> ClusterHistory:
    """Run the clustering of round ``i`` (default: the newest point).

    ``pairs`` may pass in precomputed spanning-tree edges of the first ``i+1`` points.
    """
    if i is None:
        i = m.n - 1
    if not 0 <= i < m.n:
        raise UnknownPoint(i)
    size = i + 1
    D = m.restricted(size)
    floor = threshold(alpha, 1)
    if size > 1:
        off = D[~np.eye(size, dtype=bool)]
        if exact(off.min().item()) < floor:
            raise MinDistanceViolation(
                f"minimum pairwise distance {off.min().item()!r} is below 2*alpha = {float(floor)}"
            )
    if pairs is None:
        pairs = spanning_pairs(D)
    # Thresholds only grow, so one union-find over the spanning-tree edges in
    # length order yields every phase; merge_phase is the one-phase reference.
    P = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    order = np.argsort(D[P[:, 0], P[:, 1]], kind="stable")
    P = P[order]
    w = D[P[:, 0], P[:, 1]]
    find, union = _min_root_union_find(range(size))
    phases = [PhaseClustering.singletons(size)]
    done, t = 0, 0
    while done < len(P):
        t += 1
        thr = threshold(alpha, t + 1)
        take = int(below(w[done:], thr).sum())
        for u, v in P[done:done + take].tolist():
            union(u, v)
        done += take
        phases.append(PhaseClustering(t, tuple(find(v) for v in range(size))))
    return ClusterHistory(i, alpha, tuple(phases), ranks_from_phases(phases))


def rank_of(h: ClusterHistory, v: int):
    if not 0 <= v <= h.round:
        raise UnknownPoint(v)
    return h.ranks[v]
