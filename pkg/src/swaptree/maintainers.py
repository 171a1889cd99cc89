"""Online tree maintainers behind one arrival-driven interface.

``constant``  unit virtual ranks, up to ``K`` single-step head decrements per arrival
``single``    lattice virtual ranks, at most one ``K``-step decrement (one swap) per arrival
``delta``     the lattice rule with ``K/delta``, applied only every ``1/delta`` arrivals
``greedy``    attach to the nearest point, then swap while some tree edge is at least
              ``1+epsilon`` times a non-tree edge closing a cycle through it
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .clustering import ClusterHistory, extend_spanning_pairs, run_clustering, spanning_pairs
from .errors import AdmissibilityViolation, BudgetExceeded, InvariantViolation
from .metric import OnlineMetric
from .numeric import INF, exact, json_number
from .ranks import (KSTEP, UNIT, build_pending, kstep_choice, l1_distance, select_highest,
                    update_virtual, update_virtual_kstep, weight)
from .tree import (LeveledEdge, LeveledTree, SwapTrace, attach_new_vertex, cost, decrement_head,
                   edge_key)

ALGORITHMS = ("constant", "single", "delta", "greedy")
VERIFY_LEVELS = ("off", "budget", "full")


@dataclass
class MaintainerConfig:
    algorithm: str = "constant"
    alpha: float = 6.0
    K: int | None = None
    epsilon: float = 1.0
    delta: float = 1.0
    seed: int = 0
    strict: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.alpha < 6:
            raise ValueError("alpha must be at least 6")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        period = 1 / self.delta
        if abs(period - round(period)) > 1e-9:
            raise ValueError("1/delta must be an integer")
        if self.K is not None and self.K < 1:
            raise ValueError("K must be positive")

    @property
    def k(self) -> int:
        """Swap budget / lattice step; ``2*alpha**2`` unless overridden."""
        if self.K is not None:
            return int(self.K)
        return math.ceil(2 * exact(self.alpha) ** 2)

    @property
    def period(self) -> int:
        return int(round(1 / self.delta))


def swap_allowance(n: int, epsilon) -> int:
    """Largest swap count ``c`` with ``(1+eps)**c <= 4**n``, computed exactly."""
    base = 1 + Fraction(exact(epsilon))
    cap = 4 ** n
    c = int(n * math.log(4) / math.log(float(base)))
    while base ** (c + 1) <= cap:
        c += 1
    while c > 0 and base ** c > cap:
        c -= 1
    return c


@dataclass
class RoundReport:
    round: int
    algorithm: str
    trace: SwapTrace
    swap_count: int
    cum_swaps: int
    tree_cost: float
    mst_cost: float
    weight_rank: int | None = None
    weight_vrank: int | None = None
    dual_lb: int | None = None
    steiner_opt: float | None = None
    init_rank: int | None = None
    vrank_shift: int | None = None

    def to_json(self) -> dict:
        return {
            "round": self.round,
            "algorithm": self.algorithm,
            "added": [e.as_row() for e in self.trace.added],
            "removed": [e.as_row() for e in self.trace.removed],
            "relabeled": [e.as_row() for e in self.trace.relabeled],
            "swap_count": self.swap_count,
            "cum_swaps": self.cum_swaps,
            "tree_cost": json_number(self.tree_cost),
            "mst_cost": json_number(self.mst_cost),
            "dual_lb": json_number(self.dual_lb),
            "weight_rank": json_number(self.weight_rank),
            "weight_vrank": json_number(self.weight_vrank),
            "steiner_opt": json_number(self.steiner_opt),
            "init_rank": self.init_rank,
            "vrank_shift": self.vrank_shift,
        }


def _mst_total(m: OnlineMetric, pairs=None):
    D = m.matrix
    if pairs is None:
        pairs = spanning_pairs(D)
    vals = [D[u, v].item() for u, v in pairs]
    return math.fsum(vals) if not m.integral else sum(vals)


class Maintainer:
    """Base class: owns the metric, the tree and the per-round bookkeeping.

    Call :meth:`on_arrival` once per point, root first; every non-root call
    returns a :class:`RoundReport`.
    """

    algorithm = ""

    def __init__(self, config: MaintainerConfig | None = None, integral: bool = False,
                 verify: str = "budget", track_ranks: bool = True):
        self.config = config or MaintainerConfig(self.algorithm)
        if verify not in VERIFY_LEVELS:
            raise ValueError(f"verify must be one of {VERIFY_LEVELS}")
        self.verify = verify
        self.track_ranks = track_ranks
        self.alpha = self.config.alpha
        self.metric = OnlineMetric(integral=integral)
        self.tree = self._new_tree()
        self.round = -1
        self.cum_swaps = 0
        self.max_swaps = 0
        self.history: ClusterHistory | None = None
        self.prev_history: ClusterHistory | None = None
        self.rank: list = []
        self.vrank: list = []
        self.init: list = []
        self.reports: list[RoundReport] = []
        self.mst_pairs: list = []
        self.shared = None

    def _new_tree(self) -> LeveledTree:
        return LeveledTree(UNIT, 1, n_vertices=0)

    @property
    def n(self) -> int:
        return self.metric.n

    def on_arrival(self, dists=(), shared=None) -> RoundReport | None:
        """Process one arrival.

        ``shared`` is used by :func:`run_lockstep`: a ``(mst_pairs, history)``
        pair for a metric this maintainer shares with the one that already
        inserted the point (``history`` may be ``None`` if nobody tracked ranks).
        """
        if shared is None:
            p = self.metric.add_point(dists)
        else:
            p = self.metric.n - 1
            if p != self.round + 1:
                raise ValueError("shared metric is not one point ahead of this maintainer")
        self.round = p
        if p == 0:
            self.tree.add_vertex()
            self.rank = [INF]
            self.vrank = [INF]
            self.init = [INF]
            self.shared = ([], None)
            return None
        if shared is None:
            pairs = extend_spanning_pairs(self.metric.matrix, self.mst_pairs)
            h = None
        else:
            pairs, h = shared
        if self.track_ranks and h is None:
            h = run_clustering(self.metric, self.alpha, pairs=pairs)
        self.mst_pairs = pairs
        self.shared = (pairs, h)
        if not self.track_ranks:
            h = None
        if h is not None:
            if h.round != p or h.alpha != self.alpha:
                raise ValueError("shared clustering belongs to another round or alpha")
            self.prev_history, self.history = self.history, h
            self.init.append(h.init_rank)
        vrank_before = list(self.vrank)
        trace = self._round(h)
        swaps = trace.swaps
        self.cum_swaps += swaps
        self.max_swaps = max(self.max_swaps, swaps)
        rep = RoundReport(
            round=p,
            algorithm=self.algorithm,
            trace=trace,
            swap_count=swaps,
            cum_swaps=self.cum_swaps,
            tree_cost=cost(self.tree),
            mst_cost=_mst_total(self.metric, pairs),
        )
        if h is not None:
            self.rank = list(h.ranks)
            rep.init_rank = h.init_rank
            rep.weight_rank = weight(self.rank, self.alpha)
            rep.dual_lb = (exact(self.alpha) - 1) * rep.weight_rank
        if self.vrank and len(self.vrank) == p + 1:
            rep.weight_vrank = weight(self.vrank, self.alpha)
            rep.vrank_shift = l1_distance(self.vrank, vrank_before)
        if self.verify != "off":
            self._check_budget(rep)
        if self.verify == "full":
            from .checks import check_round

            check_round(self, rep)
        self.reports.append(rep)
        return rep

    def _round(self, h: ClusterHistory | None) -> SwapTrace:
        raise NotImplementedError

    def _check_budget(self, rep: RoundReport):
        pass

    def run(self, arrivals):
        for dists in arrivals:
            self.on_arrival(dists)
        return self.reports


class ConstantSwaps(Maintainer):
    """Up to ``K`` swaps per arrival; tree valid for unit-step virtual ranks."""

    algorithm = "constant"

    def _round(self, h):
        i, K = self.round, self.config.k
        rank_now = list(h.ranks)
        init_new = h.init_rank
        chosen = select_highest(build_pending(self.vrank, rank_now), K)
        b = self.vrank + [init_new]
        trace = attach_new_vertex(self.tree, self.metric, i, init_new, self.alpha)
        for j, k in chosen:
            if k != b[j] - 1:
                raise AdmissibilityViolation(f"pair ({j},{k}) is not a unit step from {b[j]}")
            b_new = list(b)
            b_new[j] = k
            trace.extend(decrement_head(self.tree, self.metric, j, b, b_new, self.alpha))
            b = b_new
        expected = update_virtual(self.vrank, rank_now, K, init_new)
        if b != expected:
            raise AdmissibilityViolation("incremental decrements disagree with the virtual-rank rule")
        self.vrank = b
        return trace

    def _check_budget(self, rep):
        K = self.config.k
        if rep.swap_count > K:
            raise BudgetExceeded(f"round {rep.round}: {rep.swap_count} swaps > K = {K}")
        if rep.vrank_shift > K:
            raise BudgetExceeded(f"round {rep.round}: virtual ranks moved by {rep.vrank_shift} > {K}")
        if rep.weight_vrank > exact(self.alpha) ** 2 * rep.weight_rank:
            raise InvariantViolation(f"round {rep.round}: weight(vrank) > alpha^2 weight(rank)")


class SingleSwap(Maintainer):
    """At most one swap per arrival; tree ``K``-valid for lattice virtual ranks."""

    algorithm = "single"

    def _new_tree(self):
        return LeveledTree(KSTEP, self.step, n_vertices=0)

    @property
    def step(self) -> int:
        return self.config.k

    def active(self, i: int) -> bool:
        return True

    def _round(self, h):
        i, K = self.round, self.step
        rank_now = list(h.ranks)
        init_new = h.init_rank
        b = self.vrank + [init_new]
        trace = attach_new_vertex(self.tree, self.metric, i, init_new, self.alpha)
        if self.active(i):
            choice = kstep_choice(self.vrank, rank_now, K)
            if choice is not None:
                j, k = choice
                b_new = list(b)
                b_new[j] = k
                trace.extend(decrement_head(self.tree, self.metric, j, b, b_new, self.alpha))
                b = b_new
            if b != update_virtual_kstep(self.vrank, rank_now, K, init_new):
                raise AdmissibilityViolation("lattice update disagrees with the virtual-rank rule")
        self.vrank = b
        return trace

    def _check_budget(self, rep):
        if rep.swap_count > 1:
            raise BudgetExceeded(f"round {rep.round}: {rep.swap_count} swaps > 1")
        if len(rep.trace.added) > 2 or len(rep.trace.removed) > 1:
            raise BudgetExceeded(f"round {rep.round}: trace larger than one swap")
        if rep.vrank_shift > self.step:
            raise BudgetExceeded(f"round {rep.round}: virtual ranks moved by {rep.vrank_shift}")
        bound = exact(self.alpha) ** (2 * self.step + 1) * rep.weight_rank
        if rep.weight_vrank > bound:
            raise InvariantViolation(f"round {rep.round}: weight(vrank) > alpha^(2K+1) weight(rank)")


class DeltaSwaps(SingleSwap):
    """Lattice rule with step ``K/delta``, run only on rounds divisible by ``1/delta``."""

    algorithm = "delta"

    @property
    def step(self) -> int:
        return self.config.k * self.config.period

    def active(self, i: int) -> bool:
        return i % self.config.period == 0

    def _check_budget(self, rep):
        super()._check_budget(rep)
        if not self.active(rep.round) and rep.swap_count:
            raise BudgetExceeded(f"round {rep.round}: swap on an inactive round")
        if rep.cum_swaps > rep.round // self.config.period:
            raise BudgetExceeded(f"round {rep.round}: {rep.cum_swaps} swaps exceed delta * n")


def bottleneck_matrix(T: LeveledTree, D: np.ndarray) -> np.ndarray:
    """``B[u, v]`` = longest edge on the tree path between ``u`` and ``v``.

    Vertices are visited in BFS order; a vertex's row against everything
    visited before it is its parent's row capped below by the parent edge.
    Work happens in BFS coordinates so each step is a prefix slice.
    """
    n = T.n_vertices
    order = [0]
    parent = {0: -1}
    for x in order:
        for y in sorted(T.adj[x]):
            if y not in parent:
                parent[y] = x
                order.append(y)
    pos = {v: i for i, v in enumerate(order)}
    Bp = np.zeros((n, n), dtype=D.dtype)
    for i in range(1, n):
        v = order[i]
        p = pos[parent[v]]
        row = np.maximum(Bp[p, :i], D[v, parent[v]])
        row[p] = D[v, parent[v]]
        Bp[i, :i] = row
        Bp[:i, i] = row
    idx = np.asarray(order)
    B = np.empty_like(Bp)
    B[np.ix_(idx, idx)] = Bp
    return B


def find_improving_swap(T: LeveledTree, m: OnlineMetric, epsilon, strict: bool = False):
    """Most improving ``(tree edge, non-tree pair)`` swap, or ``None`` at quiescence.

    For a non-tree pair ``f`` the best partner is the longest edge on its
    tree path, so the search is an argmax of path-bottleneck over length.
    Ties in the ratio go to the lexicographically smallest ``(e, f)``.
    """
    n = T.n_vertices
    if n < 3:
        return None
    D = m.restricted(n)
    B = bottleneck_matrix(T, D)
    factor = 1 + epsilon
    iu = np.triu_indices(n, k=1)
    b, d = B[iu], D[iu]
    if D.dtype.kind in "iu" and float(factor).is_integer():
        scaled = int(factor) * d
    else:
        scaled = factor * d
    improving = b > scaled if strict else b >= scaled
    if not improving.any():
        return None
    ratio = np.where(improving, b / d, -np.inf)
    best = ratio.max()
    cands = []
    for k in np.flatnonzero(ratio == best):
        u, v = int(iu[0][k]), int(iu[1][k])
        top = B[u, v]
        for key in T.path(u, v):
            if T.edges[key].length == top:
                cands.append((key, (u, v)))
    return min(cands)


class GreedyBudget(Maintainer):
    """Nearest-point attach followed by ``(1+epsilon)``-improving swaps to quiescence."""

    algorithm = "greedy"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.origin_length: dict[int, object] = {}
        self.lineage_swaps: dict[int, int] = {}

    def _round(self, h):
        i = self.round
        eps = self.config.epsilon
        self.tree.add_vertex()
        j, d = self.metric.nearest(i, range(i))
        g = LeveledEdge(j, i, d, 1, lineage=i)
        self.tree.add_edge(g)
        self.origin_length[i] = d
        self.lineage_swaps[i] = 0
        trace = SwapTrace(added=[g])
        while True:
            found = find_improving_swap(self.tree, self.metric, eps, self.config.strict)
            if found is None:
                break
            e_key, (u, v) = found
            old = self.tree.remove_edge(e_key)
            new = LeveledEdge(u, v, self.metric.distance(u, v), 1, lineage=old.lineage)
            self.tree.add_edge(new)
            self.lineage_swaps[old.lineage] += 1
            trace.removed.append(old)
            trace.added.append(new)
        return trace

    def _check_budget(self, rep):
        allowance = swap_allowance(rep.round, self.config.epsilon)
        if rep.cum_swaps > allowance:
            raise BudgetExceeded(
                f"round {rep.round}: {rep.cum_swaps} swaps > n log_(1+eps) 4 = {allowance}"
            )


MAINTAINERS = {
    "constant": ConstantSwaps,
    "single": SingleSwap,
    "delta": DeltaSwaps,
    "greedy": GreedyBudget,
}


def make_maintainer(config: MaintainerConfig, integral: bool = False, verify: str = "budget",
                    track_ranks: bool = True) -> Maintainer:
    return MAINTAINERS[config.algorithm](config, integral=integral, verify=verify,
                                         track_ranks=track_ranks)


def run_instance(spec, config: MaintainerConfig, verify: str = "budget", track_ranks: bool = True):
    """Feed an instance through a fresh maintainer; returns the maintainer."""
    mt = make_maintainer(config, integral=spec.declared_integral, verify=verify,
                         track_ranks=track_ranks or config.algorithm != "greedy")
    mt.run(spec.arrivals())
    return mt


def run_lockstep(spec, configs, verify: str = "budget", after=None) -> list[Maintainer]:
    """Run several configurations over one instance, sharing per-round clustering.

    The first maintainer that tracks ranks computes the round's spanning tree
    and clustering, and the rest reuse them; results match independent runs.
    ``after(mt, report)`` is called once per maintainer per non-root round.
    """
    mts = [make_maintainer(c, integral=spec.declared_integral, verify=verify,
                           track_ranks=c.algorithm != "greedy") for c in configs]
    alphas = {c.alpha for c in configs}
    if len(alphas) > 1:
        raise ValueError("lockstep runs need a common alpha")
    order = sorted(range(len(mts)), key=lambda k: not mts[k].track_ranks)
    lead = mts[order[0]]
    for mt in mts:
        mt.metric = lead.metric
    for dists in spec.arrivals():
        shared = None
        for k in order:
            rep = mts[k].on_arrival(dists, shared)
            if rep is not None and after is not None:
                after(mts[k], rep)
            shared = mts[k].shared
    return mts
