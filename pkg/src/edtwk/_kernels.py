"""Hot inner loops: global-alignment DP and replicator iteration.

Every kernel has a numba implementation (``*_nb``) and a pure-numpy one
(``*_np``). The public names at the bottom are bound to one or the other at
import time according to :data:`edtwk._accel.USE_NUMBA`; both variants stay
importable so tests and the benchmark can compare them.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

# replicator exit status
CONVERGED = 0
MAX_ITER = 1
DEGENERATE = 2

# switch to log-space above this sequence length, or when exp(-phi) would
# drop below 1e-300
LOG_SPACE_LENGTH = 32
LOG_SPACE_PHI = -math.log(1e-300)


# ---------------------------------------------------------------------------
# local divergence

@njit
def sq_dist_matrix_nb(P, Q, scale):
    m, d = P.shape
    n = Q.shape[0]
    out = np.empty((m, n))
    for i in range(m):
        for j in range(n):
            s = 0.0
            for k in range(d):
                diff = P[i, k] - Q[j, k]
                s += diff * diff
            out[i, j] = s * scale
    return out


def sq_dist_matrix_np(P, Q, scale):
    diff = P[:, None, :] - Q[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff) * scale


# ---------------------------------------------------------------------------
# global alignment DP

@njit
def gak_linear_nb(phi):
    m, n = phi.shape
    M = np.zeros((m + 1, n + 1))
    M[0, 0] = 1.0
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            M[i, j] = math.exp(-phi[i - 1, j - 1]) * (
                (M[i - 1, j] + M[i, j - 1]) + M[i - 1, j - 1])
    return M[m, n]


@njit
def _logaddexp3(a, b, c):
    hi = max(a, max(b, c))
    if hi == -np.inf:
        return -np.inf
    return hi + math.log(math.exp(a - hi) + math.exp(b - hi) + math.exp(c - hi))


@njit
def gak_log_nb(phi):
    m, n = phi.shape
    L = np.full((m + 1, n + 1), -np.inf)
    L[0, 0] = 0.0
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            L[i, j] = -phi[i - 1, j - 1] + _logaddexp3(L[i - 1, j], L[i, j - 1], L[i - 1, j - 1])
    return L[m, n]


def _antidiagonals(m, n):
    for s in range(2, m + n + 1):
        i = np.arange(max(1, s - n), min(m, s - 1) + 1)
        yield i, s - i


def gak_linear_np(phi):
    m, n = phi.shape
    M = np.zeros((m + 1, n + 1))
    M[0, 0] = 1.0
    local = np.exp(-phi)
    for i, j in _antidiagonals(m, n):
        M[i, j] = local[i - 1, j - 1] * ((M[i - 1, j] + M[i, j - 1]) + M[i - 1, j - 1])
    return M[m, n]


def gak_log_np(phi):
    m, n = phi.shape
    L = np.full((m + 1, n + 1), -np.inf)
    L[0, 0] = 0.0
    for i, j in _antidiagonals(m, n):
        stacked = np.stack([L[i - 1, j], L[i, j - 1], L[i - 1, j - 1]])
        hi = stacked.max(axis=0)
        finite = np.isfinite(hi)
        acc = np.full(hi.shape, -np.inf)
        acc[finite] = hi[finite] + np.log(np.exp(stacked[:, finite] - hi[finite]).sum(axis=0))
        L[i, j] = acc - phi[i - 1, j - 1]
    return L[m, n]


def needs_log_space(phi):
    m, n = phi.shape
    return max(m, n) > LOG_SPACE_LENGTH or float(phi.max()) > LOG_SPACE_PHI


@njit
def log_gak_nb(P, Q, scale):
    phi = sq_dist_matrix_nb(P, Q, scale)
    m, n = phi.shape
    if max(m, n) > LOG_SPACE_LENGTH or phi.max() > LOG_SPACE_PHI:
        return gak_log_nb(phi)
    return math.log(gak_linear_nb(phi))


def log_gak_np(P, Q, scale):
    phi = sq_dist_matrix_np(P, Q, scale)
    if needs_log_space(phi):
        return gak_log_np(phi)
    return math.log(gak_linear_np(phi))


@njit
def log_gram_nb(X, scale):
    N = X.shape[0]
    G = np.empty((N, N))
    for p in range(N):
        for q in range(p, N):
            v = log_gak_nb(X[p], X[q], scale)
            G[p, q] = v
            G[q, p] = v
    return G


def log_gram_np(X, scale):
    N = X.shape[0]
    G = np.empty((N, N))
    for p in range(N):
        for q in range(p, N):
            G[p, q] = G[q, p] = log_gak_np(X[p], X[q], scale)
    return G


# ---------------------------------------------------------------------------
# replicator dynamics

@njit
def replicator_nb(W, a0, tol, max_iter, history):
    """Iterate from ``a0``; ``history[k]`` receives the objective at iterate k.

    Returns (a, iterations, status, max |sum(a) - 1|, min entry seen).
    """
    n = a0.shape[0]
    a = a0.copy()
    b = np.empty(n)
    Wa = np.empty(n)
    sum_err = abs(a.sum() - 1.0)
    min_entry = a.min()
    for k in range(max_iter + 1):
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += W[i, j] * a[j]
            Wa[i] = s
        f = 0.0
        for i in range(n):
            f += a[i] * Wa[i]
        history[k] = f
        if f <= 0.0:
            return a, k, DEGENERATE, sum_err, min_entry
        if k == max_iter:
            break
        total = 0.0
        for i in range(n):
            b[i] = a[i] * Wa[i] / f
            total += b[i]
        delta = 0.0
        for i in range(n):
            b[i] /= total
            d = abs(b[i] - a[i])
            if d > delta:
                delta = d
        a, b = b, a
        e = 0.0
        for i in range(n):
            e += a[i]
            if a[i] < min_entry:
                min_entry = a[i]
        e = abs(e - 1.0)
        if e > sum_err:
            sum_err = e
        if delta < tol:
            # objective at the accepted iterate
            f = 0.0
            for i in range(n):
                s = 0.0
                for j in range(n):
                    s += W[i, j] * a[j]
                f += a[i] * s
            history[k + 1] = f
            return a, k + 1, CONVERGED, sum_err, min_entry
    return a, max_iter, MAX_ITER, sum_err, min_entry


def replicator_np(W, a0, tol, max_iter, history):
    a = a0.copy()
    sum_err = abs(a.sum() - 1.0)
    min_entry = a.min()
    for k in range(max_iter + 1):
        Wa = W @ a
        f = float(a @ Wa)
        history[k] = f
        if f <= 0.0:
            return a, k, DEGENERATE, sum_err, min_entry
        if k == max_iter:
            break
        b = a * Wa / f
        b /= b.sum()
        delta = np.abs(b - a).max()
        a = b
        sum_err = max(sum_err, abs(a.sum() - 1.0))
        min_entry = min(min_entry, a.min())
        if delta < tol:
            history[k + 1] = float(a @ (W @ a))
            return a, k + 1, CONVERGED, sum_err, min_entry
    return a, max_iter, MAX_ITER, sum_err, min_entry


if USE_NUMBA:
    sq_dist_matrix = sq_dist_matrix_nb
    gak_linear = gak_linear_nb
    gak_log = gak_log_nb
    log_gak = log_gak_nb
    log_gram = log_gram_nb
    replicator = replicator_nb
else:
    sq_dist_matrix = sq_dist_matrix_np
    gak_linear = gak_linear_np
    gak_log = gak_log_np
    log_gak = log_gak_np
    log_gram = log_gram_np
    replicator = replicator_np
