import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_connected_graph
from edtwk.commute import (commute_time_resistance_oracle, commute_time_spectral,
                           laplacian)
from edtwk.errors import SingularityError, ValidationError
from edtwk.market import NetworkSnapshot


@pytest.mark.parametrize("A, L", [
    ([[0, 1], [1, 0]], [[1, -1], [-1, 1]]),
    (np.zeros((3, 3)), np.zeros((3, 3))),
    ([[0, 2, 0], [2, 0, 3], [0, 3, 0]], [[2, -2, 0], [-2, 5, -3], [0, -3, 3]]),
])
def test_laplacian_examples(A, L):
    assert np.array_equal(laplacian(np.array(A, dtype=float)), np.array(L, dtype=float))


def test_laplacian_rejects_asymmetric():
    with pytest.raises(ValidationError):
        laplacian(np.array([[0, 1.0], [2.0, 0]]))


@pytest.mark.parametrize("w", [0.01, 1.0, 7.5])
@pytest.mark.parametrize("fn", [commute_time_spectral, commute_time_resistance_oracle])
def test_two_vertices(fn, w):
    C = fn(np.array([[0, w], [w, 0]]))
    assert C.values[0, 1] == pytest.approx(2.0, abs=1e-10)
    assert C.volume == pytest.approx(2 * w)


@pytest.mark.parametrize("fn", [commute_time_spectral, commute_time_resistance_oracle])
def test_triangle_and_path(fn):
    K3 = np.ones((3, 3)) - np.eye(3)
    np.testing.assert_allclose(fn(K3).values, 4 * K3, atol=1e-10)
    path = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
    C = fn(path).values
    assert C[0, 2] == pytest.approx(8.0, abs=1e-10)
    assert C[0, 1] == pytest.approx(4.0, abs=1e-10)


def test_accepts_snapshot():
    snap = NetworkSnapshot(5, np.array([[0, 0.5], [0.5, 0]]))
    assert commute_time_spectral(snap).values[0, 1] == pytest.approx(2.0)


@pytest.mark.parametrize("fn", [commute_time_spectral, commute_time_resistance_oracle])
def test_disconnected_raises_with_components(fn):
    A = np.zeros((4, 4))
    A[0, 1] = A[1, 0] = 1
    A[2, 3] = A[3, 2] = 1
    with pytest.raises(SingularityError) as exc:
        fn(A)
    assert sorted(exc.value.components) == [[0, 1], [2, 3]]


def test_ridge_tolerates_disconnection():
    A = np.zeros((3, 3))
    A[0, 1] = A[1, 0] = 1
    C = commute_time_spectral(A, ridge=1e-3)
    assert np.all(np.isfinite(C.values))


def test_spectral_matches_oracle_on_random_graphs(rng):
    for _ in range(100):
        n = int(rng.integers(2, 31))
        A = random_connected_graph(rng, n)
        S = commute_time_spectral(A).values
        O = commute_time_resistance_oracle(A).values
        off = ~np.eye(n, dtype=bool)
        assert np.max(np.abs(S[off] - O[off]) / O[off]) < 1e-8


def test_metric_invariants(rng):
    for _ in range(30):
        n = int(rng.integers(3, 15))
        C = commute_time_spectral(random_connected_graph(rng, n)).values
        assert np.array_equal(C, C.T)
        assert np.all(np.diag(C) == 0) and C.min() >= 0
        # C[u, w] <= C[u, v] + C[v, w] for every triple
        slack = C[:, None, :] - (C[:, :, None] + C[None, :, :])
        assert slack.max() <= 1e-9 * max(1.0, C.max())


@given(st.integers(2, 12), st.floats(1e-3, 1e3), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_scale_invariance(n, alpha, seed):
    A = random_connected_graph(np.random.default_rng(seed), n)
    C1 = commute_time_spectral(A).values
    C2 = commute_time_spectral(alpha * A).values
    np.testing.assert_allclose(C2, C1, rtol=1e-8, atol=1e-8 * C1.max())


def _simulate_commute(A, u, v, n_walks, rng):
    P = A / A.sum(axis=1, keepdims=True)
    cum = np.cumsum(P, axis=1)
    pos = np.full(n_walks, u)
    reached = np.zeros(n_walks, dtype=bool)
    done = np.zeros(n_walks, dtype=bool)
    steps = np.zeros(n_walks, dtype=np.int64)
    while not done.all():
        act = ~done
        r = rng.random(act.sum())
        pos[act] = (r[:, None] > cum[pos[act]]).sum(axis=1)
        steps[act] += 1
        reached |= act & (pos == v)
        done |= reached & (pos == u)
    return steps


def test_monte_carlo_random_walk():
    A = np.array([[0, 1.0, 0.5, 0, 0],
                  [1.0, 0, 2.0, 0.3, 0],
                  [0.5, 2.0, 0, 1.0, 0.2],
                  [0, 0.3, 1.0, 0, 1.5],
                  [0, 0, 0.2, 1.5, 0]])
    C = commute_time_spectral(A).values
    rng = np.random.default_rng(2024)
    steps = _simulate_commute(A, 0, 4, 100_000, rng)
    se = steps.std(ddof=1) / np.sqrt(steps.size)
    assert abs(steps.mean() - C[0, 4]) < 3 * se
