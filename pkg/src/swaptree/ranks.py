"""Rank vectors, the weight functional, and virtual-rank updates.

Rank vectors are plain lists indexed by point id with ``INF`` at the root.
Virtual ranks come in two variants: ``unit`` lags the true ranks by unit
steps, ``kstep`` moves on the lattice ``Init(j) - l*K`` one coordinate at a
time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import AdmissibilityViolation, InfinityAtNonRoot, LatticeViolation
from .numeric import INF, exact

UNIT = "unit"
KSTEP = "kstep"


def pair_key(pair):
    """Sort key realising the total order on (vertex, rank) pairs: rank first, then vertex."""
    j, k = pair
    return (k, j)


def weight(values: Sequence, alpha) -> int:
    """Sum of ``alpha**v[l]`` over non-root indices, computed exactly."""
    a = exact(alpha)
    total = 0
    for l in range(1, len(values)):
        v = values[l]
        if v == INF:
            raise InfinityAtNonRoot(f"infinite rank at vertex {l}")
        total += a ** int(v)
    return total


def build_pending(vrank_prev: Sequence, rank_now: Sequence) -> list[tuple[int, int]]:
    """All (j, k) with ``rank_now[j] <= k < vrank_prev[j]``, for previously arrived non-root j."""
    pending = []
    for j in range(1, len(vrank_prev)):
        for k in range(int(rank_now[j]), int(vrank_prev[j])):
            pending.append((j, k))
    return sorted(pending, key=pair_key)


def select_highest(pending, K: int) -> list[tuple[int, int]]:
    """The ``K`` highest pairs, highest first (all of them when fewer than ``K``)."""
    return sorted(pending, key=pair_key, reverse=True)[:K]


def update_virtual(vrank_prev: Sequence, rank_now: Sequence, K: int, init_new) -> list:
    """Unit-step virtual ranks for the new round."""
    chosen = select_highest(build_pending(vrank_prev, rank_now), K)
    out = list(vrank_prev) + [init_new]
    for j, k in chosen:
        out[j] = min(out[j], k)
    if sum(vrank_prev[j] - out[j] for j in range(1, len(vrank_prev))) > K:
        raise AdmissibilityViolation("more than K unit decrements in one round")
    return out


def kstep_candidates(vrank_prev: Sequence, rank_now: Sequence, K: int) -> list[tuple[int, int]]:
    return sorted(
        ((j, int(vrank_prev[j]) - K) for j in range(1, len(vrank_prev))
         if rank_now[j] <= vrank_prev[j] - K),
        key=pair_key,
    )


def kstep_choice(vrank_prev: Sequence, rank_now: Sequence, K: int):
    """The highest lattice step available, or ``None``."""
    cands = kstep_candidates(vrank_prev, rank_now, K)
    return cands[-1] if cands else None


def update_virtual_kstep(vrank_prev: Sequence, rank_now: Sequence, K: int, init_new, init=None) -> list:
    """Lattice virtual ranks: at most one coordinate drops, by exactly ``K``."""
    if init is not None:
        bad = lattice_violations(vrank_prev, init, K)
        if bad:
            raise LatticeViolation(f"off-lattice coordinates {bad}")
    out = list(vrank_prev) + [init_new]
    choice = kstep_choice(vrank_prev, rank_now, K)
    if choice is not None:
        j, k = choice
        out[j] = k
    return out


def lattice_violations(values: Sequence, init: Sequence, K: int) -> list[int]:
    return [
        j for j in range(1, len(values))
        if values[j] > init[j] or (init[j] - values[j]) % K
    ]


@dataclass
class AdmissibilityReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def check_admissible(values, rank_now, init, variant=UNIT, K: int = 1) -> AdmissibilityReport:
    """List every coordinate outside ``[rank, Init]`` (and off the lattice for kstep)."""
    bad = []
    if len(values) != len(rank_now) or len(values) != len(init):
        bad.append((None, "length mismatch"))
        return AdmissibilityReport(bad)
    if values and values[0] != INF:
        bad.append((0, "root not infinite"))
    for j in range(1, len(values)):
        v = values[j]
        if v == INF or (isinstance(v, float) and math.isnan(v)):
            bad.append((j, "infinite"))
            continue
        if v < rank_now[j]:
            bad.append((j, "below rank"))
        if v > init[j]:
            bad.append((j, "above init"))
        if variant == KSTEP and v <= init[j] and (init[j] - v) % K:
            bad.append((j, "off lattice"))
    return AdmissibilityReport(bad)


def l1_distance(new: Sequence, old: Sequence) -> int:
    """L1 distance over the coordinates ``old`` covers, skipping the root."""
    return sum(abs(new[j] - old[j]) for j in range(1, len(old)))
