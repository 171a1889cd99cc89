"""Growing distance table over the arrived points.

Point 0 is the root; later points get consecutive ids in arrival order.
Every insertion re-validates the triangle inequality against all stored
pairs, so malformed instances fail here instead of deep inside clustering.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySet, NonPositiveDistance, Overlap, TriangleViolation, UnknownPoint

RTOL = 1e-9


class OnlineMetric:
    """Symmetric distance table that only ever grows.

    With ``integral=True`` distances are kept as int64 and every comparison
    is exact; otherwise float64 with relative tolerance ``rtol`` on the
    triangle check.
    """

    def __init__(self, integral: bool = False, rtol: float = RTOL, capacity: int = 16):
        self.integral = integral
        self.rtol = 0.0 if integral else rtol
        self._dtype = np.int64 if integral else np.float64
        self._d = np.zeros((capacity, capacity), dtype=self._dtype)
        self.n = 0
        self.min_pairwise = math.inf

    @classmethod
    def from_matrix(cls, matrix, integral: bool | None = None) -> "OnlineMetric":
        matrix = np.asarray(matrix)
        if integral is None:
            integral = np.issubdtype(matrix.dtype, np.integer)
        m = cls(integral=integral, capacity=max(len(matrix), 1))
        for i in range(len(matrix)):
            m.add_point(matrix[i, :i])
        return m

    @property
    def matrix(self) -> np.ndarray:
        """Read-only view of the ``n x n`` table."""
        view = self._d[: self.n, : self.n]
        view.flags.writeable = False
        return view

    def __len__(self):
        return self.n

    def _grow(self):
        cap = max(2 * len(self._d), 16)
        d = np.zeros((cap, cap), dtype=self._dtype)
        d[: self.n, : self.n] = self._d[: self.n, : self.n]
        self._d = d

    def _coerce(self, dists: Sequence) -> np.ndarray:
        raw = np.asarray(dists, dtype=np.float64 if not self.integral else object).reshape(-1)
        if len(raw) != self.n:
            raise ValueError(f"expected {self.n} distances, got {len(raw)}")
        if self.integral:
            out = np.empty(self.n, dtype=np.int64)
            for k, x in enumerate(raw):
                if isinstance(x, float) and not math.isfinite(x):
                    raise NonPositiveDistance(f"distance to point {k} is not finite: {x!r}")
                if int(x) != x:
                    raise ValueError(f"distance to point {k} is not integral: {x!r}")
                out[k] = int(x)
        else:
            out = raw.astype(np.float64)
            bad = ~np.isfinite(out)
            if bad.any():
                k = int(np.argmax(bad))
                raise NonPositiveDistance(f"distance to point {k} is not finite: {out[k]!r}")
        if (out <= 0).any():
            k = int(np.argmax(out <= 0))
            raise NonPositiveDistance(f"distance to point {k} is {out[k]!r}; must be positive")
        return out

    def _check_triangles(self, dc: np.ndarray):
        n = self.n
        if n < 2:
            return
        D = self._d[:n, :n]
        scale = 1.0 + self.rtol
        # new point c in the middle: d(a,b) <= d(a,c) + d(c,b)
        rhs = dc[:, None] + dc[None, :]
        bad = D > rhs * scale if self.rtol else D > rhs
        if bad.any():
            a, b = map(int, np.argwhere(bad)[0])
            raise TriangleViolation(a, b, n, (D[a, b] - rhs[a, b]).item())
        # new point at an end: d(a,c) <= d(a,b) + d(b,c)
        rhs = D + dc[None, :]
        lhs = np.broadcast_to(dc[:, None], (n, n))
        bad = lhs > rhs * scale if self.rtol else lhs > rhs
        if bad.any():
            a, b = map(int, np.argwhere(bad)[0])
            raise TriangleViolation(a, n, b, (lhs[a, b] - rhs[a, b]).item())

    def add_point(self, dists: Sequence = ()) -> int:
        """Insert the next point given its distances to points ``0..n-1``."""
        dc = self._coerce(dists)
        self._check_triangles(dc)
        if self.n == len(self._d):
            self._grow()
        p = self.n
        self._d[p, :p] = dc
        self._d[:p, p] = dc
        if p:
            self.min_pairwise = min(self.min_pairwise, dc.min().item())
        self.n += 1
        return p

    def _check(self, p):
        if not 0 <= p < self.n:
            raise UnknownPoint(p)

    def distance(self, a: int, b: int):
        self._check(a)
        self._check(b)
        return self._d[a, b].item()

    def row(self, p: int) -> np.ndarray:
        self._check(p)
        return self._d[p, : self.n]

    def nearest(self, p: int, among: Iterable[int]):
        """Closest point of ``among`` to ``p``; ties go to the smallest id."""
        self._check(p)
        ids = sorted(set(among))
        if not ids:
            raise EmptySet("nearest() over an empty set")
        if p in ids:
            raise Overlap(f"point {p} is in the candidate set")
        for q in ids:
            self._check(q)
        row = self._d[p, ids]
        k = int(np.argmin(row))
        return ids[k], row[k].item()

    def set_distance(self, S: Iterable[int], T: Iterable[int]):
        S, T = sorted(set(S)), sorted(set(T))
        if not S or not T:
            raise EmptySet("set_distance() needs two nonempty sets")
        if set(S) & set(T):
            raise Overlap("set_distance() needs disjoint sets")
        for q in S + T:
            self._check(q)
        return self._d[np.ix_(S, T)].min().item()

    def restricted(self, k: int) -> np.ndarray:
        """Distance table of the first ``k`` points."""
        return self._d[:k, :k]
