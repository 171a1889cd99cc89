"""Exact-arithmetic helpers shared by the rank, tree and oracle code."""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

INF = math.inf


def exact(x) -> int | Fraction:
    """Return ``x`` as an int when integral, else as an exact Fraction."""
    if isinstance(x, int):
        return x
    if isinstance(x, Rational):
        return int(x) if x.denominator == 1 else Fraction(x)
    f = Fraction(float(x))
    return int(f) if f.denominator == 1 else f


def threshold(alpha, power: int) -> int | Fraction:
    """``2 * alpha**power`` exactly."""
    return 2 * exact(alpha) ** power


def as_number(x):
    """Convert a numpy scalar to the matching Python number."""
    return x.item() if hasattr(x, "item") else x


def exact_sum(values) -> int | Fraction:
    total = 0
    for v in values:
        total += exact(as_number(v))
    return total


def json_number(x):
    """JSON-friendly form of an exact value: ints and floats pass, fractions become strings."""
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    return as_number(x)


def exceeds(x, bound) -> bool:
    """Exact ``x > bound`` for a float or int ``x`` and an exact ``bound``.

    Floats compare directly unless they tie with ``float(bound)``; only
    then is the comparison redone in rationals.
    """
    if isinstance(x, int) and isinstance(bound, int):
        return x > bound
    xf, bf = float(x), float(bound)
    if xf != bf:
        return xf > bf
    return exact(x) > exact(bound)
