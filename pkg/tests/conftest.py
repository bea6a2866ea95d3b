import pytest

from swarmbasis.basis import BasisConfig, Partition
from swarmbasis.targets import make_target

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def unit10():
    return BasisConfig(Partition.uniform([(0.0, 1.0)], [10]))


@pytest.fixture
def paper_targets():
    """u^2, sin(3u), exp(-2u) with their analytic sup |f'| on [0, 1]."""
    return [
        (make_target({"name": "polynomial", "coeffs": [0, 0, 1]}), 2.0),
        (make_target({"name": "sin", "a": 3}), 3.0),
        (make_target({"name": "exp", "a": -2}), 2.0),
    ]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def brute_cell(breakpoints, x):
    """Independent cell lookup: linear scan, half-open, last interval closed."""
    q = len(breakpoints) - 1
    for k in range(1, q + 1):
        lo, hi = breakpoints[k - 1], breakpoints[k]
        if lo <= x < hi or (k == q and x == hi):
            return k
    raise ValueError(x)

