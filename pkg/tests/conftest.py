import numpy as np
import pytest


def random_connected_graph(rng, n, density=0.6):
    """Random weighted graph with a spanning path so it is always connected."""
    A = np.where(rng.random((n, n)) < density, rng.uniform(0.05, 1.0, (n, n)), 0.0)
    A = np.triu(A, 1)
    perm = rng.permutation(n)
    for a, b in zip(perm, perm[1:]):
        i, j = min(a, b), max(a, b)
        A[i, j] = max(A[i, j], rng.uniform(0.05, 1.0))
    return A + A.T


def random_affinity(rng, n):
    W = np.triu(rng.random((n, n)), 1)
    return W + W.T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
