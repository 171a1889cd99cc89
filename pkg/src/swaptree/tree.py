"""Spanning trees whose edges carry explicit level labels.

The levels witness validity with respect to a per-vertex value function
``b``: at every level ``l`` each component of the edges with level ``<= l``
has a head (largest ``b``, ties to the lowest id) with ``b >= l`` (``>= l*K``
in the coarse variant), and a level-``l`` edge is no longer than
``2*alpha**(l+1)`` (``2*alpha**(l*K+1)``).
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NoReplacementEdge, ValidityBroken
from .metric import OnlineMetric
from .numeric import exact, exceeds, threshold
from .ranks import KSTEP, UNIT


def edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class LeveledEdge:
    u: int
    v: int
    length: float
    level: int
    lineage: int = -1

    @property
    def key(self) -> tuple[int, int]:
        return edge_key(self.u, self.v)

    def as_row(self) -> list:
        u, v = self.key
        return [u, v, self.length, self.level]


@dataclass
class SwapTrace:
    added: list = field(default_factory=list)
    removed: list = field(default_factory=list)
    # edges whose level changed in place (no swap)
    relabeled: list = field(default_factory=list)

    @property
    def swaps(self) -> int:
        return len(self.removed)

    def extend(self, other: "SwapTrace"):
        self.added.extend(other.added)
        self.removed.extend(other.removed)
        self.relabeled.extend(other.relabeled)

    def __len__(self):
        return len(self.added) + len(self.removed)


class LeveledTree:
    """Spanning tree on ``0..n_vertices-1`` with levelled edges.

    ``K`` only matters for the ``kstep`` variant, where level ``l`` stands
    for the block of unit levels ``(l-1)K+1 .. lK``.
    """

    def __init__(self, variant: str = UNIT, K: int = 1, n_vertices: int = 1):
        if variant not in (UNIT, KSTEP):
            raise ValueError(f"unknown variant {variant!r}")
        self.variant = variant
        self.K = K if variant == KSTEP else 1
        self.n_vertices = n_vertices
        self.edges: dict[tuple[int, int], LeveledEdge] = {}
        self.adj: dict[int, set[int]] = {v: set() for v in range(n_vertices)}

    def copy(self) -> "LeveledTree":
        t = LeveledTree(self.variant, self.K, self.n_vertices)
        t.edges = dict(self.edges)
        t.adj = {v: set(ns) for v, ns in self.adj.items()}
        return t

    # level arithmetic
    def head_floor(self, level: int) -> int:
        """Smallest head value a level-``level`` component may have."""
        return level * self.K

    def length_bound(self, level: int, alpha):
        return threshold(alpha, level * self.K + 1)

    def attach_level(self, init_rank: int) -> int:
        return int(init_rank) // self.K + 1

    def critical_level(self, value: int) -> int:
        """Level at which a head with ``value`` stops qualifying once lowered one step."""
        return int(value) // self.K

    # mutation
    def add_vertex(self) -> int:
        v = self.n_vertices
        self.adj[v] = set()
        self.n_vertices += 1
        return v

    def add_edge(self, e: LeveledEdge):
        if e.key in self.edges:
            raise ValidityBroken(f"edge {e.key} already present")
        self.edges[e.key] = e
        self.adj[e.u].add(e.v)
        self.adj[e.v].add(e.u)

    def remove_edge(self, key) -> LeveledEdge:
        e = self.edges.pop(edge_key(*key))
        self.adj[e.u].discard(e.v)
        self.adj[e.v].discard(e.u)
        return e

    def relevel(self, key, level: int) -> LeveledEdge:
        e = replace(self.edges[key], level=level)
        self.edges[key] = e
        return e

    # queries
    def __len__(self):
        return len(self.edges)

    @property
    def max_level(self) -> int:
        return max((e.level for e in self.edges.values()), default=0)

    def components(self, max_level: float = math.inf) -> list[int]:
        """Component label (smallest member id) of every vertex using edges of level ``<= max_level``."""
        parent = list(range(self.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (u, v), e in self.edges.items():
            if e.level <= max_level:
                ru, rv = find(u), find(v)
                if ru != rv:
                    parent[max(ru, rv)] = min(ru, rv)
        return [find(v) for v in range(self.n_vertices)]

    def path(self, a: int, b: int) -> list[tuple[int, int]]:
        """Edge keys on the tree path from ``a`` to ``b``."""
        prev = {a: None}
        queue = deque([a])
        while queue:
            x = queue.popleft()
            if x == b:
                break
            for y in self.adj[x]:
                if y not in prev:
                    prev[y] = x
                    queue.append(y)
        if b not in prev:
            raise ValidityBroken(f"{a} and {b} are not connected")
        keys = []
        while b != a:
            keys.append(edge_key(b, prev[b]))
            b = prev[b]
        return keys[::-1]

    def is_spanning(self) -> bool:
        if len(self.edges) != self.n_vertices - 1:
            return False
        return len(set(self.components())) == 1

    def apply(self, trace: SwapTrace):
        for e in trace.removed:
            self.remove_edge(e.key)
        for e in trace.added:
            self.add_edge(e)
        for e in trace.relabeled:
            self.edges[e.key] = e


def head(members, b) -> int:
    """Member with the largest ``b`` value, ties to the lowest id."""
    return min(members, key=lambda v: (-b[v], v))


def cost(T: LeveledTree):
    lengths = [e.length for e in T.edges.values()]
    if any(isinstance(x, float) for x in lengths):
        return math.fsum(lengths)
    return sum(lengths)


def attach_new_vertex(T: LeveledTree, m: OnlineMetric, new: int, init_rank, alpha) -> SwapTrace:
    """Connect ``new`` to its nearest predecessor at the level its Init value dictates."""
    if new != T.n_vertices:
        raise ValidityBroken(f"expected vertex {T.n_vertices}, got {new}")
    T.add_vertex()
    if new == 0:
        return SwapTrace()
    j, d = m.nearest(new, range(new))
    level = T.attach_level(init_rank)
    if exceeds(d, T.length_bound(level, alpha)):
        raise ValidityBroken(
            f"attach edge ({j},{new}) of length {d} too long for level {level}"
        )
    e = LeveledEdge(j, new, d, level, lineage=new)
    T.add_edge(e)
    return SwapTrace(added=[e])


def _drop_choice(T: LeveledTree, keys, above: int) -> tuple[int, int] | None:
    cands = [T.edges[k] for k in keys if T.edges[k].level > above]
    if not cands:
        return None
    best = min(cands, key=lambda e: (-e.level, -e.length, e.key))
    return best.key


def decrement_head(T: LeveledTree, m: OnlineMetric, j_star: int, b_old, b_new, alpha) -> SwapTrace:
    """Restore validity after lowering ``b[j_star]`` by one step.

    Only the level where ``j_star`` stops qualifying as a head can break. If
    its component there loses every qualifying head, reconnect it to the
    closest outside vertex at that level and drop the highest-level edge on
    the cycle this closes. At most one edge enters and one leaves.
    """
    step = b_old[j_star] - b_new[j_star]
    if step != T.K or any(b_old[v] != b_new[v] for v in range(len(b_old)) if v != j_star):
        raise ValidityBroken(f"decrement_head expects a single step of {T.K} at {j_star}")
    lvl = T.critical_level(b_old[j_star])
    if lvl < 1 or lvl >= T.max_level + 1:
        return SwapTrace()
    labels = T.components(lvl)
    lab = labels[j_star]
    comp = [v for v in range(T.n_vertices) if labels[v] == lab]
    if max(b_new[v] for v in comp) >= T.head_floor(lvl):
        return SwapTrace()
    outside = [v for v in range(T.n_vertices) if labels[v] != lab]
    if not outside:
        raise NoReplacementEdge(f"component of {j_star} at level {lvl} spans everything")
    block = m.restricted(T.n_vertices)[np.ix_(outside, comp)]
    flat = int(np.argmin(block))
    r, c = divmod(flat, len(comp))
    j, inside = outside[r], comp[c]
    d = block[r, c].item()
    if exceeds(d, T.length_bound(lvl, alpha)):
        raise NoReplacementEdge(
            f"closest outside vertex {j} is at {d}, above the level-{lvl} bound"
        )
    key = edge_key(j, inside)
    cycle = T.path(j, inside)
    drop = _drop_choice(T, cycle, lvl)
    if drop is None:
        raise ValidityBroken(f"no edge above level {lvl} on the cycle closed by {key}")
    if drop == key:
        # the replacement already exists one level up; lowering it is enough
        e = T.relevel(key, lvl)
        return SwapTrace(relabeled=[e])
    removed = T.remove_edge(drop)
    e = LeveledEdge(key[0], key[1], d, lvl, lineage=removed.lineage)
    T.add_edge(e)
    return SwapTrace(added=[e], removed=[removed])


@dataclass
class ValidityReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def check_valid(T: LeveledTree, b, alpha, m: OnlineMetric | None = None) -> ValidityReport:
    """Check spanning-ness and both level conditions against ``b``."""
    bad = []
    if len(b) != T.n_vertices:
        bad.append(("values", f"{len(b)} values for {T.n_vertices} vertices"))
        return ValidityReport(bad)
    if not T.is_spanning():
        bad.append(("spanning", f"{len(T.edges)} edges on {T.n_vertices} vertices"))
    for key, e in T.edges.items():
        if e.level < 1:
            bad.append(("level", f"edge {key} at level {e.level}"))
            continue
        if m is not None and m.distance(*key) != e.length:
            bad.append(("length", f"edge {key} stores {e.length}, metric says {m.distance(*key)}"))
        if exceeds(e.length, T.length_bound(e.level, alpha)):
            bad.append(("length-bound", f"edge {key} of length {e.length} at level {e.level}"))
    for l in range(1, T.max_level + 1):
        labels = T.components(l)
        best: dict[int, int] = {}
        for v, lab in enumerate(labels):
            cur = best.get(lab)
            if cur is None or (-b[v], v) < (-b[cur], cur):
                best[lab] = v
        floor = T.head_floor(l)
        for lab, h in best.items():
            if b[h] < floor:
                bad.append(("head", f"level {l}: component of {lab} has head {h} with value {b[h]} < {floor}"))
    return ValidityReport(bad)
