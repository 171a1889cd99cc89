"""``swaptree`` command line: gen / run / verify.

Exit codes: 0 ok, 1 invariant violation, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .bench import FORMATS, RunConfig, run_experiment, verify_instance
from .errors import InputError, InvariantViolation
from .instances import gen_euclidean, gen_graph, gen_spider, rescale, to_json
from .maintainers import ALGORITHMS, VERIFY_LEVELS, MaintainerConfig


def _delta(text: str) -> float:
    # accept "1/4" as well as "0.25"
    return float(Fraction(text))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swaptree", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance as JSON")
    g.add_argument("family", choices=["spider", "euclidean", "graph"])
    g.add_argument("--k", type=int, default=4, help="spider copies")
    g.add_argument("--n", type=int, default=100, help="euclidean points / graph vertices")
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--terminals", type=int, default=10, help="graph terminals")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--alpha", type=float, default=6.0)
    g.add_argument("--no-rescale", action="store_true",
                   help="skip scaling the closest pair up to 2*alpha")
    g.add_argument("--out", default=None)

    r = sub.add_parser("run", help="run a maintainer over an instance")
    r.add_argument("instance")
    r.add_argument("--algorithm", choices=ALGORITHMS, default="constant")
    r.add_argument("--alpha", type=float, default=6.0)
    r.add_argument("--epsilon", type=float, default=1.0)
    r.add_argument("--delta", type=_delta, default=1.0)
    r.add_argument("--k-override", type=int, default=None, dest="k")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--format", choices=FORMATS, default="jsonl")
    r.add_argument("--verify-level", choices=VERIFY_LEVELS, default="budget", dest="verify")
    r.add_argument("--out", default=None)

    v = sub.add_parser("verify", help="check an instance file")
    v.add_argument("instance")
    v.add_argument("--alpha", type=float, default=None)
    return p


def _emit(text: str, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _gen(args):
    if args.family == "spider":
        spec = gen_spider(args.k)
    elif args.family == "euclidean":
        spec = gen_euclidean(args.n, args.dim, args.seed)
    else:
        spec = gen_graph(args.n, args.terminals, args.seed)
    if not args.no_rescale:
        spec = rescale(spec, args.alpha)
    _emit(json.dumps(to_json(spec), indent=1) + "\n", args.out)


def _run(args):
    mc = MaintainerConfig(args.algorithm, alpha=args.alpha, K=args.k, epsilon=args.epsilon,
                          delta=args.delta, seed=args.seed)
    cfg = RunConfig(args.instance, mc, out=args.out, format=args.format, verify=args.verify)
    stream, summary = run_experiment(cfg)
    _emit(stream, cfg.out)
    if summary:
        sys.stderr.write(summary)


def _verify(args):
    print(json.dumps(verify_instance(args.instance, args.alpha)))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"gen": _gen, "run": _run, "verify": _verify}[args.command]
    try:
        handler(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1
    except (InputError, OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
