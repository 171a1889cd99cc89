"""Exception hierarchy.

Input problems (bad instances, bad queries) derive from ``InputError``;
broken internal guarantees derive from ``InvariantViolation``. The CLI maps
the two families to exit codes 2 and 1.
"""


class SwapTreeError(Exception):
    pass


class InputError(SwapTreeError, ValueError):
    pass


class InvariantViolation(SwapTreeError, AssertionError):
    pass


# metric
class TriangleViolation(InputError):
    def __init__(self, a, b, c, slack):
        self.triple = (a, b, c)
        self.slack = slack
        super().__init__(
            f"triangle inequality fails: d({a},{b}) > d({a},{c}) + d({c},{b}) by {slack!r}"
        )


class NonPositiveDistance(InputError):
    pass


class UnknownPoint(InputError, KeyError):
    pass


class EmptySet(InputError):
    pass


class Overlap(InputError):
    pass


# clustering / ranks
class MinDistanceViolation(InputError):
    pass


class InfinityAtNonRoot(InvariantViolation):
    pass


class AdmissibilityViolation(InvariantViolation):
    pass


class LatticeViolation(InvariantViolation):
    pass


# trees
class NoReplacementEdge(InvariantViolation):
    pass


class ValidityBroken(InvariantViolation):
    pass


class BudgetExceeded(InvariantViolation):
    pass


# oracle / instances
class TooManyTerminals(InputError):
    pass


class LineageBroken(InvariantViolation):
    pass


class Disconnected(InputError):
    pass


class DegenerateInstance(InputError):
    pass


class SchemaError(InputError):
    pass
