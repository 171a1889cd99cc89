"""Arrival instances: generators, rescaling, JSON persistence.

An instance is a point cloud (``coords``), a weighted graph whose
shortest-path closure is the metric, or an explicit distance ``matrix``. For
graphs the arrival order lists the terminals, and the remaining vertices are
available as Steiner points. Matrices are taken as given, so they are the
one source that can carry a broken triangle for the verifier to report.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DegenerateInstance, Disconnected, SchemaError
from .numeric import exact


@dataclass
class GraphInstance:
    """Weighted undirected graph; edges are ``(u, v, w)`` triples."""

    n: int
    edges: list = field(default_factory=list)

    @property
    def integral(self) -> bool:
        return all(float(w).is_integer() for _, _, w in self.edges)


@dataclass
class InstanceSpec:
    name: str
    coords: list | None = None
    graph: GraphInstance | None = None
    matrix: list | None = None
    arrival_order: list = field(default_factory=list)
    declared_integral: bool = False
    alpha_for_scaling: float = 6.0
    scale: object = 1

    def __post_init__(self):
        given = [x is not None for x in (self.coords, self.graph, self.matrix)]
        if sum(given) != 1:
            raise SchemaError("an instance needs exactly one of coords, graph or matrix")

    @property
    def n_points(self) -> int:
        return len(self.arrival_order)

    def metric_matrix(self) -> np.ndarray:
        """Distances between arrivals, in arrival order."""
        order = list(self.arrival_order)
        if self.graph is not None:
            return graph_closure(self.graph)[np.ix_(order, order)]
        if self.matrix is not None:
            M = np.asarray(self.matrix, dtype=np.int64 if self.declared_integral else np.float64)
            return M[np.ix_(order, order)]
        X = np.asarray(self.coords, dtype=np.float64)[order]
        return np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=-1))

    def arrivals(self):
        """Yield, per arrival, its distances to all earlier arrivals."""
        D = self.metric_matrix()
        for i in range(len(D)):
            yield D[i, :i]


def graph_closure(g: GraphInstance) -> np.ndarray:
    """All-pairs shortest paths (Floyd-Warshall); int64 when weights are integral."""
    integral = g.integral
    if g.n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    big = np.iinfo(np.int64).max // 4 if integral else np.inf
    D = np.full((g.n, g.n), big, dtype=np.int64 if integral else np.float64)
    np.fill_diagonal(D, 0)
    for u, v, w in g.edges:
        w = int(w) if integral else float(w)
        if w <= 0:
            raise SchemaError(f"edge ({u},{v}) has non-positive weight {w}")
        if w < D[u, v]:
            D[u, v] = D[v, u] = w
    for k in range(g.n):
        D = np.minimum(D, D[:, k, None] + D[None, k, :])
    if (D >= big).any():
        a, b = np.argwhere(D >= big)[0]
        raise Disconnected(f"vertices {a} and {b} are not connected")
    return D


def _gadget_ids(k: int) -> dict:
    ids = {"a": 0}
    nxt = 1
    for q in range(k):
        for name in "bcde":
            ids[f"{name}{q}"] = nxt
            nxt += 1
    return ids


def gen_spider(k: int) -> InstanceSpec:
    """``k`` copies of the gadget a-b, b-c, c-d (length 2), b-e glued at ``a``.

    Arrivals: every d, then every e, then every c, then a, then every b.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    ids = _gadget_ids(k)
    edges = []
    for q in range(k):
        b, c, d, e = (ids[f"{x}{q}"] for x in "bcde")
        edges += [(ids["a"], b, 1), (b, c, 1), (c, d, 2), (b, e, 1)]
    order = (
        [ids[f"d{q}"] for q in range(k)]
        + [ids[f"e{q}"] for q in range(k)]
        + [ids[f"c{q}"] for q in range(k)]
        + [ids["a"]]
        + [ids[f"b{q}"] for q in range(k)]
    )
    return InstanceSpec(
        name=f"spider-{k}",
        graph=GraphInstance(4 * k + 1, edges),
        arrival_order=order,
        declared_integral=True,
    )


def gen_euclidean(n: int, dim: int = 2, seed: int = 0) -> InstanceSpec:
    """``n`` uniform points in the unit cube; arrival order is generation order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    X = rng.random((n, dim))
    return InstanceSpec(
        name=f"euclid-n{n}-d{dim}-s{seed}",
        coords=X.tolist(),
        arrival_order=list(range(n)),
    )


def gen_graph(n_vertices: int, n_terminals: int, seed: int = 0, max_weight: int = 20,
              extra_edge_prob: float = 0.2) -> InstanceSpec:
    """Random connected graph with integer weights and a random terminal arrival order.

    A random spanning tree guarantees connectivity; extra edges appear
    independently with ``extra_edge_prob``.
    """
    if not 1 <= n_terminals <= n_vertices:
        raise ValueError("need 1 <= n_terminals <= n_vertices")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_vertices).tolist()
    edges = {}
    for pos in range(1, n_vertices):
        u, v = perm[pos], perm[int(rng.integers(pos))]
        edges[(min(u, v), max(u, v))] = int(rng.integers(1, max_weight + 1))
    for u in range(n_vertices):
        for v in range(u + 1, n_vertices):
            if (u, v) not in edges and rng.random() < extra_edge_prob:
                edges[(u, v)] = int(rng.integers(1, max_weight + 1))
    terminals = rng.choice(n_vertices, size=n_terminals, replace=False).tolist()
    return InstanceSpec(
        name=f"graph-v{n_vertices}-t{n_terminals}-s{seed}",
        graph=GraphInstance(n_vertices, [(u, v, w) for (u, v), w in sorted(edges.items())]),
        arrival_order=[int(t) for t in terminals],
        declared_integral=True,
    )


def min_pairwise(spec: InstanceSpec):
    D = spec.metric_matrix()
    if len(D) < 2:
        return math.inf
    return D[~np.eye(len(D), dtype=bool)].min().item()


def rescale(spec: InstanceSpec, alpha=None) -> InstanceSpec:
    """Scale distances so the closest pair of arrivals sits at ``2*alpha`` or more.

    Integral instances use the integer factor ``ceil(2*alpha/min)`` so every
    distance stays an exact integer.
    """
    alpha = spec.alpha_for_scaling if alpha is None else alpha
    lo = min_pairwise(spec)
    if lo == math.inf:
        return replace(spec, alpha_for_scaling=alpha)
    if lo <= 0:
        raise DegenerateInstance(f"{spec.name}: two arrivals coincide")
    target = 2 * exact(alpha)
    if spec.declared_integral:
        s = max(1, math.ceil(target / exact(lo)))
    else:
        s = float(target / exact(lo)) if exact(lo) < target else 1.0
    while True:
        out = _scaled(spec, s, alpha)
        if exact(min_pairwise(out)) >= target:
            return out
        s = math.nextafter(s, math.inf)


def _scaled(spec: InstanceSpec, s, alpha) -> InstanceSpec:
    total = s * spec.scale if isinstance(s, int) and isinstance(spec.scale, int) else float(s) * float(spec.scale)
    if spec.graph is not None:
        edges = [(u, v, w * s) for u, v, w in spec.graph.edges]
        return replace(spec, graph=GraphInstance(spec.graph.n, edges), alpha_for_scaling=alpha, scale=total)
    if spec.matrix is not None:
        M = [[x * s for x in row] for row in spec.matrix]
        return replace(spec, matrix=M, alpha_for_scaling=alpha, scale=total)
    coords = (np.asarray(spec.coords, dtype=np.float64) * s).tolist()
    return replace(spec, coords=coords, alpha_for_scaling=alpha, scale=total)


# persistence

def to_json(spec: InstanceSpec) -> dict:
    if spec.graph is not None:
        def w(x):
            return str(int(x)) if spec.declared_integral else float(x)

        source = {"graph": {"n": spec.graph.n, "edges": [[u, v, w(x)] for u, v, x in spec.graph.edges]}}
    elif spec.matrix is not None:
        cell = (lambda x: str(int(x))) if spec.declared_integral else float
        source = {"matrix": [[cell(x) for x in row] for row in spec.matrix]}
    else:
        source = {"coords": [list(map(float, p)) for p in spec.coords]}
    out = {
        "name": spec.name,
        "alpha_for_scaling": spec.alpha_for_scaling,
        "declared_integral": spec.declared_integral,
        "source": source,
        "arrival_order": list(spec.arrival_order),
    }
    if spec.scale != 1:
        out["scale"] = spec.scale
    return out


def from_json(obj: dict) -> InstanceSpec:
    try:
        name = obj["name"]
        source = obj["source"]
        order = [int(x) for x in obj["arrival_order"]]
        integral = bool(obj.get("declared_integral", False))
        alpha = obj.get("alpha_for_scaling", 6.0)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed instance: {exc!r}") from exc
    if not isinstance(source, dict) or len(source) != 1:
        raise SchemaError("source must hold exactly one of 'coords', 'graph' or 'matrix'")
    if "coords" in source:
        coords = source["coords"]
        if not coords or any(len(p) != len(coords[0]) for p in coords):
            raise SchemaError("coords must be a nonempty list of equal-length vectors")
        spec = InstanceSpec(name, coords=[list(map(float, p)) for p in coords], arrival_order=order,
                            declared_integral=integral, alpha_for_scaling=alpha, scale=obj.get("scale", 1))
        universe = len(coords)
        if sorted(order) != list(range(universe)):
            raise SchemaError("arrival_order must be a permutation of the points")
    elif "graph" in source:
        g = source["graph"]
        try:
            n = int(g["n"])
            edges = [(int(u), int(v), int(w) if integral else float(w)) for u, v, w in g["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed graph: {exc!r}") from exc
        if any(not (0 <= u < n and 0 <= v < n) or u == v for u, v, _ in edges):
            raise SchemaError("graph edge endpoints out of range")
        spec = InstanceSpec(name, graph=GraphInstance(n, edges), arrival_order=order,
                            declared_integral=integral, alpha_for_scaling=alpha, scale=obj.get("scale", 1))
        if len(set(order)) != len(order) or any(not 0 <= t < n for t in order):
            raise SchemaError("arrival_order must list distinct graph vertices")
    elif "matrix" in source:
        rows = source["matrix"]
        try:
            M = [[int(x) if integral else float(x) for x in row] for row in rows]
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"malformed matrix: {exc!r}") from exc
        n = len(M)
        if n == 0 or any(len(r) != n for r in M):
            raise SchemaError("matrix must be square and nonempty")
        if any(M[a][b] != M[b][a] for a in range(n) for b in range(a)):
            raise SchemaError("matrix must be symmetric")
        if any(M[a][a] != 0 for a in range(n)):
            raise SchemaError("matrix diagonal must be zero")
        spec = InstanceSpec(name, matrix=M, arrival_order=order, declared_integral=integral,
                            alpha_for_scaling=alpha, scale=obj.get("scale", 1))
        if sorted(order) != list(range(n)):
            raise SchemaError("arrival_order must be a permutation of the matrix rows")
    else:
        raise SchemaError("source must hold 'coords', 'graph' or 'matrix'")
    if not order:
        raise SchemaError("arrival_order is empty; the root must arrive")
    return spec


def save(spec: InstanceSpec, path):
    Path(path).write_text(json.dumps(to_json(spec), indent=1) + "\n")


def load(path) -> InstanceSpec:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not JSON ({exc})") from exc
    return from_json(obj)
