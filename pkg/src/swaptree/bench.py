"""Experiment runner: instance file in, per-round report stream out."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

from .errors import DegenerateInstance, MinDistanceViolation
from .instances import InstanceSpec, graph_closure, load, min_pairwise
from .maintainers import MaintainerConfig, make_maintainer
from .metric import OnlineMetric
from .numeric import exact, json_number, threshold
from .oracle import MAX_TERMINALS, lineage_ratio, steiner_opt

FORMATS = ("jsonl", "csv")
CSV_FIELDS = ("round", "algorithm", "added", "removed", "relabeled", "swap_count", "cum_swaps",
              "tree_cost", "mst_cost", "dual_lb", "weight_rank", "weight_vrank", "steiner_opt",
              "init_rank", "vrank_shift")


@dataclass
class RunConfig:
    instance: str
    maintainer: MaintainerConfig = field(default_factory=MaintainerConfig)
    out: str | None = None
    format: str = "jsonl"
    verify: str = "budget"

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


class _Steiner:
    """Exact optimum per prefix of terminals, for small graph instances only."""

    def __init__(self, spec: InstanceSpec):
        self.spec = spec
        self.closure = None
        if spec.graph is not None and spec.n_points <= MAX_TERMINALS:
            self.closure = graph_closure(spec.graph)

    def __call__(self, i: int):
        if self.closure is None:
            return None
        return steiner_opt(self.spec.graph, self.spec.arrival_order[: i + 1], self.closure)


def run_spec(spec: InstanceSpec, config: MaintainerConfig, verify: str = "budget"):
    """Run ``spec``; returns ``(header, round dicts, summary)``."""
    mt = make_maintainer(config, integral=spec.declared_integral, verify=verify)
    opt = _Steiner(spec)
    header = {
        "header": {
            "instance": spec.name,
            "n": spec.n_points,
            "scale": json_number(spec.scale),
            "config": asdict(config),
            "verify": verify,
        }
    }
    rows = []
    for dists in spec.arrivals():
        rep = mt.on_arrival(dists)
        if rep is None:
            continue
        rep.steiner_opt = opt(rep.round)
        rows.append(rep.to_json())
    last = mt.reports[-1] if mt.reports else None
    summary = {
        "cum_swaps": mt.cum_swaps,
        "max_swaps": mt.max_swaps,
        "rounds": len(mt.reports),
        "final_cost": json_number(last.tree_cost) if last else 0,
        "mst_cost": json_number(last.mst_cost) if last else 0,
        "dual_lb": json_number(last.dual_lb) if last else 0,
        "steiner_opt": json_number(last.steiner_opt) if last else None,
        "lineage_ratio": json_number(lineage_ratio(mt.reports)) if config.algorithm == "greedy" else None,
    }
    return header, rows, {"summary": summary}


def render(header, rows, summary, fmt: str = "jsonl") -> tuple[str, str]:
    """Serialise a run; returns ``(main stream, summary line)``.

    JSONL keeps everything in one stream. CSV holds the rounds only, nested
    edge lists encoded as JSON strings; the summary goes out separately.
    """
    if fmt == "jsonl":
        lines = [_dumps(header)] + [_dumps(r) for r in rows] + [_dumps(summary)]
        return "\n".join(lines) + "\n", ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _dumps(r[k]) if isinstance(r[k], list) else r[k] for k in CSV_FIELDS})
    return buf.getvalue(), _dumps(summary) + "\n"


def run_experiment(cfg: RunConfig) -> tuple[str, str]:
    spec = load(cfg.instance)
    header, rows, summary = run_spec(spec, cfg.maintainer, cfg.verify)
    return render(header, rows, summary, cfg.format)


def verify_instance(path, alpha=None) -> dict:
    """Load ``path`` and check the schema, the metric axioms and the ``2*alpha`` floor.

    Raises an :class:`InputError` subclass naming the offending pair or triple.
    """
    spec = load(path)
    alpha = spec.alpha_for_scaling if alpha is None else alpha
    D = spec.metric_matrix()
    n = len(D)
    for a in range(n):
        for b in range(a + 1, n):
            if D[a, b] <= 0:
                raise DegenerateInstance(f"arrivals {a} and {b} coincide (distance {D[a, b].item()})")
    m = OnlineMetric(integral=spec.declared_integral)
    for i in range(n):
        m.add_point(D[i, :i])
    lo = min_pairwise(spec)
    if n > 1 and exact(lo) < threshold(alpha, 1):
        raise MinDistanceViolation(f"closest pair at {lo}, below 2*alpha = {float(threshold(alpha, 1))}; rescale first")
    return {"instance": spec.name, "n": n, "min_distance": json_number(lo) if n > 1 else None, "ok": True}
