import itertools
import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from segnn.geometry import PointSet, Rectangle

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

UNIT = Rectangle(0.0, 0.0, 1.0, 1.0)


def brute_nn(xy):
    """Lowest-index nearest neighbor by a plain double loop."""
    n = len(xy)
    out = []
    for i in range(n):
        best, best_d = None, math.inf
        for j in range(n):
            if j == i:
                continue
            d = math.hypot(xy[i][0] - xy[j][0], xy[i][1] - xy[j][1])
            if d < best_d:
                best, best_d = j, d
        out.append(best)
    return out


def brute_knn(xy, k):
    n = len(xy)
    out = []
    for i in range(n):
        d = [(math.hypot(xy[i][0] - xy[j][0], xy[i][1] - xy[j][1]), j) for j in range(n) if j != i]
        out.append([j for _, j in sorted(d)[:k]])
    return out


def table_from_nn(labels, nn, q):
    t = [[0] * q for _ in range(q)]
    for i, j in enumerate(nn):
        t[labels[i]][labels[j]] += 1
    return np.array(t)


def labelings(sizes):
    """Every assignment of class sizes to positions, by combinations (two classes)."""
    n = sum(sizes)
    for chosen in itertools.combinations(range(n), sizes[0]):
        lab = np.ones(n, dtype=int)
        lab[list(chosen)] = 0
        yield lab


def random_config(rng, n):
    return rng.uniform(size=(n, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def csr200():
    r = np.random.default_rng(7)
    return PointSet(r.uniform(size=(200, 2)), r.integers(0, 2, 200), UNIT)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """``record(criterion, ok, detail)`` prints and stores one PASS/FAIL line, then asserts."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(criterion, ok, detail):
        line = f"[acceptance {criterion:>2}] {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
