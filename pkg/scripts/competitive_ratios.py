"""Empirical cost / OPT on random graph instances, per algorithm.

Writes one CSV row per (instance, algorithm) with the final and worst
per-round ratio against the exact Steiner optimum.

    python scripts/competitive_ratios.py --instances 30 --out ratios.csv
"""
import argparse
import csv
import sys
from fractions import Fraction

import numpy as np

from swaptree import MaintainerConfig, gen_graph, rescale, run_lockstep, steiner_opt
from swaptree.instances import graph_closure
from swaptree.numeric import exact


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=30)
    ap.add_argument("--max-vertices", type=int, default=20)
    ap.add_argument("--max-terminals", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    configs = [MaintainerConfig("constant"), MaintainerConfig("single"), MaintainerConfig("greedy"),
               MaintainerConfig("greedy", epsilon=0.25)]
    rng = np.random.default_rng(args.seed)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh)
    w.writerow(["instance", "algorithm", "epsilon", "terminals", "cum_swaps", "final_ratio", "worst_ratio"])
    for s in range(args.instances):
        nv = int(rng.integers(6, args.max_vertices + 1))
        nt = int(rng.integers(2, min(args.max_terminals, nv) + 1))
        spec = rescale(gen_graph(nv, nt, seed=args.seed * 10_000 + s), 6)
        closure = graph_closure(spec.graph)
        opt = {}
        worst = {}

        def after(mt, rep):
            if rep.round not in opt:
                opt[rep.round] = steiner_opt(spec.graph, spec.arrival_order[: rep.round + 1], closure)
            r = Fraction(exact(rep.tree_cost)) / exact(opt[rep.round])
            key = id(mt)
            worst[key] = max(worst.get(key, Fraction(0)), r)

        mts = run_lockstep(spec, configs, after=after)
        for c, mt in zip(configs, mts):
            if not mt.reports:
                continue
            last = mt.reports[-1]
            final = Fraction(exact(last.tree_cost)) / exact(opt[last.round])
            w.writerow([spec.name, c.algorithm, c.epsilon if c.algorithm == "greedy" else "", nt, mt.cum_swaps,
                        f"{float(final):.4f}", f"{float(worst[id(mt)]):.4f}"])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
