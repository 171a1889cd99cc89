"""Per-round invariant checks used by ``verify="full"`` runs and by the tests.

Each ``*_violations`` function returns a list describing what failed (empty
when everything holds); :func:`check_round` raises on the first failure.
"""
from __future__ import annotations

import math

from .clustering import ClusterHistory, PhaseClustering
from .errors import InvariantViolation
from .numeric import INF, exact, threshold
from .oracle import check_dual_feasible, dual_lower_bound
from .ranks import KSTEP, UNIT, check_admissible
from .tree import check_valid

REFINEMENT_LIMIT = 50


def phase_at(h: ClusterHistory, t: int) -> PhaseClustering:
    """Clustering after phase ``t``; past the end of the ladder nothing changes."""
    return h.phases[min(t, len(h.phases) - 1)]


def rank_monotonicity_violations(prev: ClusterHistory, cur: ClusterHistory) -> list:
    """rank_i(j) <= rank_{i-1}(j) <= rank_i(j) + 1 for every earlier non-root j."""
    bad = []
    for j in range(1, prev.round + 1):
        old, new = prev.ranks[j], cur.ranks[j]
        if not new <= old <= new + 1:
            bad.append((j, old, new))
    return bad


def init_window_violations(h: ClusterHistory, m) -> list:
    """The newest vertex's Init is r exactly when its nearest distance is in [2a^(r+1), 2a^(r+2))."""
    i = h.round
    if i == 0:
        return []
    _, d = m.nearest(i, range(i))
    r = h.init_rank
    d = exact(d)
    if threshold(h.alpha, r + 1) <= d < threshold(h.alpha, r + 2):
        return []
    return [(i, r, d)]


def refinement_violations(prev: ClusterHistory, cur: ClusterHistory) -> list:
    """Parts of round i avoiding i are parts of round i-1; the part with i is i plus whole old parts."""
    i = cur.round
    bad = []
    for t in range(max(len(prev.phases), len(cur.phases))):
        old_parts = set(phase_at(prev, t).parts)
        for part in phase_at(cur, t).parts:
            if i not in part:
                if part not in old_parts:
                    bad.append((t, "foreign part", sorted(part)))
            else:
                rest = part - {i}
                covered = [p for p in old_parts if p & rest]
                if any(not p <= rest for p in covered):
                    bad.append((t, "split old part", sorted(part)))
    return bad


def delayed_merge_violations(prev: ClusterHistory, cur: ClusterHistory) -> list:
    """Vertices sharing a part at phase t of round i share one at phase t or t+1 of round i-1."""
    i = cur.round
    bad = []
    for t in range(len(cur.phases)):
        later = phase_at(prev, t + 1).leader
        for part in phase_at(cur, t).parts:
            labels = {later[v] for v in part if v != i}
            if len(labels) > 1:
                bad.append((t, sorted(part)))
    return bad


def cost_bound(T, alpha, weight_value):
    """Cost ceiling implied by validity: 2a^3/(a-1) * w, or 2a^(2K+1)/(a^K-1) * w when coarse."""
    a = exact(alpha)
    if T.variant == KSTEP:
        K = T.K
        return 2 * a ** (2 * K + 1) * weight_value / (a ** K - 1)
    return 2 * a ** 3 * weight_value / (a - 1)


def tree_violations(mt) -> list:
    """Validity, admissibility and the cost chain for a rank-based maintainer."""
    bad = []
    rep = check_valid(mt.tree, mt.vrank, mt.alpha, mt.metric)
    bad += [("validity",) + v for v in rep.violations]
    variant = mt.tree.variant
    adm = check_admissible(mt.vrank, mt.rank, mt.init, variant, mt.tree.K)
    bad += [("admissibility",) + v for v in adm.violations]
    from .ranks import weight

    w = weight(mt.vrank, mt.alpha)
    c = mt.reports[-1].tree_cost if mt.reports else 0
    if exact(c) > cost_bound(mt.tree, mt.alpha, w):
        bad.append(("cost-chain", c, w))
    return bad


def check_round(mt, rep) -> None:
    """Run every applicable per-round check on maintainer ``mt`` after round ``rep``."""
    problems = []
    h, prev = mt.history, mt.prev_history
    if h is not None:
        problems += [("init-window",) + v for v in init_window_violations(h, mt.metric)]
        if prev is not None:
            problems += [("rank-monotone",) + v for v in rank_monotonicity_violations(prev, h)]
            if h.round <= REFINEMENT_LIMIT:
                problems += [("refinement",) + v for v in refinement_violations(prev, h)]
                problems += [("delayed-merge",) + v for v in delayed_merge_violations(prev, h)]
        lb, dual = dual_lower_bound(h, mt.alpha)
        if dual.value < lb:
            problems.append(("dual-value", dual.value, lb))
        problems += [("dual",) + v for v in check_dual_feasible(dual, mt.metric).violations]
    if mt.algorithm == "greedy":
        problems += greedy_violations(mt, rep)
    else:
        mt.reports.append(rep)
        try:
            problems += tree_violations(mt)
        finally:
            mt.reports.pop()
    if problems:
        raise InvariantViolation(f"round {rep.round}: {problems[:5]}")


def greedy_violations(mt, rep) -> list:
    bad = []
    eps = exact(mt.config.epsilon)
    if exact(rep.tree_cost) > (1 + eps) * exact(rep.mst_cost) * (1 + (0 if mt.metric.integral else 1e-12)):
        bad.append(("quiescent-cost", rep.tree_cost, rep.mst_cost))
    if not mt.tree.is_spanning():
        bad.append(("spanning",))
    lineages = sorted(e.lineage for e in mt.tree.edges.values())
    if lineages != list(range(1, mt.round + 1)):
        bad.append(("lineage-bijection",))
    for e in mt.tree.edges.values():
        k = mt.lineage_swaps[e.lineage]
        if exact(e.length) * (1 + eps) ** k > exact(mt.origin_length[e.lineage]):
            bad.append(("lineage-shrink", e.key, e.lineage, k))
    return bad
