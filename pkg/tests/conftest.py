import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from swaptree import InstanceSpec, OnlineMetric

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def line_metric():
    """Points 0, 13 and 100 on a line, arriving in that order."""
    m = OnlineMetric()
    m.add_point([])
    m.add_point([13.0])
    m.add_point([100.0, 87.0])
    return m


def line_spec(xs, name="line", integral=False):
    return InstanceSpec(name, coords=[[float(x)] for x in xs], arrival_order=list(range(len(xs))),
                        declared_integral=integral)


def bridge_spec(far=1008, gap=14):
    """Root, one far point, then a chain filling the gap so the far point's rank falls step by step."""
    assert far % gap == 0
    xs = [0, far] + list(range(gap, far, gap))
    return InstanceSpec(f"bridge-{far}-{gap}", matrix=[[abs(a - b) for b in xs] for a in xs],
                        arrival_order=list(range(len(xs))), declared_integral=True)


def random_points(n, seed, dim=2, spread=100.0):
    rng = np.random.default_rng(seed)
    return rng.random((n, dim)) * spread


# acceptance reporting: one PASS/FAIL line per criterion, taken from the real test outcome
_CRITERIA: dict = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    label, text = mark.args
    ok = call.excinfo is None
    prev = _CRITERIA.get(label)
    _CRITERIA[label] = (text, ok and (prev is None or prev[1]))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: int(s[1:])):
        text, ok = _CRITERIA[label]
        terminalreporter.write_line(f"{label} {'PASS' if ok else 'FAIL'}  {text}")
