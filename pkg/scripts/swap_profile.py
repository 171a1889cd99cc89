"""Per-algorithm swap totals on random Euclidean arrivals, with optional K override.

    python scripts/swap_profile.py --n 100 --seeds 20 --k-override 1
"""
import argparse
import statistics

from swaptree import MaintainerConfig, gen_euclidean, rescale, run_lockstep


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--k-override", type=int, default=None)
    args = ap.parse_args(argv)

    configs = [
        MaintainerConfig("constant", K=args.k_override),
        MaintainerConfig("single", K=args.k_override),
        MaintainerConfig("delta", K=args.k_override, delta=0.5),
        MaintainerConfig("greedy", epsilon=1.0),
        MaintainerConfig("greedy", epsilon=0.25),
    ]
    totals = {k: [] for k in range(len(configs))}
    ratios = {k: [] for k in range(len(configs))}
    for seed in range(args.seeds):
        spec = rescale(gen_euclidean(args.n, args.dim, seed), 6)
        for k, mt in enumerate(run_lockstep(spec, configs)):
            totals[k].append(mt.cum_swaps)
            last = mt.reports[-1]
            ratios[k].append(last.tree_cost / last.mst_cost)
    for k, c in enumerate(configs):
        name = c.algorithm + (f"(eps={c.epsilon})" if c.algorithm == "greedy" else f"(K={c.k})")
        print(f"{name:18s} swaps/arrival {statistics.mean(totals[k]) / (args.n - 1):.3f}  "
              f"cost/MST {statistics.mean(ratios[k]):.3f} (max {max(ratios[k]):.3f})")


if __name__ == "__main__":
    main()
