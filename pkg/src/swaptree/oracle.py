"""Ground-truth baselines and theory checks.

* ``mst_cost``: Prim on the dense table.
* ``steiner_opt``: Dreyfus-Wagner over terminal subsets of a graph instance.
* ``dual_lower_bound`` / ``check_dual_feasible``: moat duals read off a
  cluster history, checked by direct summation over pairs.
* ``f_potential`` / ``lineage_ratio``: the potential function behind the
  greedy swap bound and the product it controls.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .clustering import ClusterHistory
from .errors import EmptySet, LineageBroken, TooManyTerminals
from .instances import GraphInstance, graph_closure
from .metric import OnlineMetric
from .numeric import as_number, exact
from .ranks import weight

MAX_TERMINALS = 12


def prim_cost(D: np.ndarray):
    """MST weight of a dense symmetric table, O(n^2)."""
    n = len(D)
    if n == 0:
        raise EmptySet("MST of an empty set")
    if n == 1:
        return 0
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = D[0].astype(np.float64 if D.dtype.kind == "f" else D.dtype).copy()
    picked = []
    for _ in range(n - 1):
        masked = np.where(in_tree, np.inf if best.dtype.kind == "f" else np.iinfo(best.dtype).max, best)
        v = int(np.argmin(masked))
        picked.append(masked[v].item())
        in_tree[v] = True
        best = np.minimum(best, D[v])
    if any(isinstance(x, float) for x in picked):
        return math.fsum(picked)
    return sum(picked)


def mst_cost(m: OnlineMetric, S: Iterable[int] | None = None):
    ids = list(range(m.n)) if S is None else sorted(set(S))
    if not ids:
        raise EmptySet("mst_cost of an empty set")
    return prim_cost(m.restricted(m.n)[np.ix_(ids, ids)])


def steiner_opt(g: GraphInstance, terminals: Sequence[int], closure: np.ndarray | None = None):
    """Exact minimum Steiner tree weight in ``g`` connecting ``terminals``.

    Dreyfus-Wagner on the metric closure: ``dp[S][v]`` is the cheapest tree
    spanning terminal set ``S`` plus vertex ``v``.
    """
    terms = sorted(set(terminals))
    if len(terms) > MAX_TERMINALS:
        raise TooManyTerminals(f"{len(terms)} terminals; the exact solver allows {MAX_TERMINALS}")
    if not terms:
        raise EmptySet("no terminals")
    D = graph_closure(g) if closure is None else closure
    if len(terms) == 1:
        return 0
    integral = D.dtype.kind in "iu"
    Dw = D.astype(np.int64 if integral else np.float64)
    k = len(terms) - 1
    last = terms[-1]
    full = (1 << k) - 1
    dp = [None] * (1 << k)
    for b in range(k):
        dp[1 << b] = Dw[terms[b]].copy()
    for S in range(1, full + 1):
        if S & (S - 1) == 0:
            continue
        low = S & -S
        rest = S ^ low
        best = None
        # enumerate splits with the lowest element pinned to the first half
        sub = rest
        while True:
            A = low | sub
            if A != S:
                cand = dp[A] + dp[S ^ A]
                best = cand if best is None else np.minimum(best, cand)
            if sub == 0:
                break
            sub = (sub - 1) & rest
        dp[S] = (best[:, None] + Dw).min(axis=0)
    val = dp[full][last]
    return as_number(val)


@dataclass
class DualSolution:
    moats: list = field(default_factory=list)  # (frozenset cluster, value)

    @property
    def value(self):
        return sum(v for _, v in self.moats)


def dual_lower_bound(h: ClusterHistory, alpha):
    """Lower bound ``(alpha-1) * weight(rank)`` and the moat dual certifying it."""
    a = exact(alpha)
    moats = []
    for t, ph in enumerate(h.phases):
        y = a ** t * (a - 1)
        for part in ph.parts:
            if 0 not in part:
                moats.append((part, y))
    return (a - 1) * weight(h.ranks, alpha), DualSolution(moats)


@dataclass
class DualReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def check_dual_feasible(dual: DualSolution, m: OnlineMetric, rtol: float = 1e-9) -> DualReport:
    """Verify every pair constraint: moats separating j and l sum to at most d(j,l).

    With membership matrix ``S`` (moats x points) and values ``y``, the load
    on pair (j, l) is ``a_j + a_l - 2 M_jl`` where ``a = y S`` and
    ``M = S^T diag(y) S``.
    """
    n = m.n
    bad = []
    if not dual.moats or n < 2:
        return DualReport(bad)
    S = np.zeros((len(dual.moats), n))
    y = np.empty(len(dual.moats))
    for r, (part, val) in enumerate(dual.moats):
        S[r, list(part)] = 1.0
        y[r] = float(val)
    a = y @ S
    load = a[:, None] + a[None, :] - 2.0 * (S.T * y) @ S
    D = m.matrix
    exact_ints = m.integral and all(isinstance(v, int) for _, v in dual.moats) and a.max() < 2 ** 52
    over = load > D if exact_ints else load > D * (1 + rtol)
    for j, l in np.argwhere(np.triu(over, k=1)):
        bad.append((int(j), int(l), as_number(load[j, l]), D[j, l].item()))
    return DualReport(bad)


def f_potential(ell: int) -> Fraction:
    """Closed form ``2**(2l-1) (2l-1) / C(2l, l)`` as an exact rational."""
    if ell < 1:
        raise ValueError("f is defined for ell >= 1")
    return Fraction(2 ** (2 * ell - 1) * (2 * ell - 1), comb(2 * ell, ell))


def f_identity_sum(ell: int) -> Fraction:
    f_l = f_potential(ell)
    return sum((f_l / (f_potential(i) * f_potential(ell - i)) for i in range(1, ell)), Fraction(0))


def lineage_ratio(reports) -> Fraction:
    """Product of greedy attach lengths over product of final tree lengths.

    Replays the traces of a greedy run: each round's first added edge is the
    greedy edge and names a lineage; each swap hands the removed edge's
    lineage to the edge that replaced it.
    """
    origin: dict[int, Fraction] = {}
    current: dict[int, object] = {}
    for rep in reports:
        trace = rep.trace
        if not trace.added:
            continue
        g = trace.added[0]
        if g.lineage in origin:
            raise LineageBroken(f"lineage {g.lineage} started twice")
        origin[g.lineage] = Fraction(exact(g.length))
        current[g.lineage] = g
        if len(trace.added) - 1 != len(trace.removed):
            raise LineageBroken(f"round {rep.round}: unpaired swap")
        for new, old in zip(trace.added[1:], trace.removed):
            if new.lineage != old.lineage or current.get(old.lineage) is None or current[old.lineage].key != old.key:
                raise LineageBroken(f"round {rep.round}: swap {old.key}->{new.key} breaks lineage")
            current[new.lineage] = new
    num = Fraction(1)
    den = Fraction(1)
    for lin, o in origin.items():
        num *= o
        den *= Fraction(exact(current[lin].length))
    return num / den
