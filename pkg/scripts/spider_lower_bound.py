"""Greedy swap counts and lineage ratios on the spider family.

    python scripts/spider_lower_bound.py --kmax 40
"""
import argparse
import math

from swaptree import MaintainerConfig, gen_spider, lineage_ratio, rescale, run_instance


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kmin", type=int, default=1)
    ap.add_argument("--kmax", type=int, default=20)
    ap.add_argument("--epsilon", type=float, default=1.0)
    args = ap.parse_args(argv)

    print("k\tm\tswaps\tswaps/m\tlog2(ratio)\t5k-2")
    for k in range(args.kmin, args.kmax + 1):
        spec = rescale(gen_spider(k), 6)
        mt = run_instance(spec, MaintainerConfig("greedy", epsilon=args.epsilon), track_ranks=False)
        r = lineage_ratio(mt.reports)
        m = 4 * k
        print(f"{k}\t{m}\t{mt.cum_swaps}\t{mt.cum_swaps / m:.3f}\t{math.log2(r):.1f}\t{5 * k - 2}")


if __name__ == "__main__":
    main()
