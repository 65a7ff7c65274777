import itertools
import math

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / math.sqrt(sum(x * x for x in v))


def brute_min_pair(X):
    """Reference closest pair: plain double loop, lexicographic tie-break."""
    best = (math.inf, 0, 1)
    for i, j in itertools.combinations(range(len(X)), 2):
        d = 1.0 - math.fsum(a * b for a, b in zip(X[i], X[j]))
        d = min(max(d, 0.0), 2.0)
        if d < best[0]:
            best = (d, i, j)
    return best[1], best[2], best[0]


def brute_nearest(x, G):
    best = (math.inf, 0)
    for g, row in enumerate(G):
        d = min(max(1.0 - math.fsum(a * b for a, b in zip(x, row)), 0.0), 2.0)
        if d < best[0]:
            best = (d, g)
    return best[1], best[0]


# Acceptance outcomes, one line per criterion, echoed in the terminal summary
# so they survive output capture.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
