"""Global alignment kernel over vector sequences and the EDTWK graph kernel.

The kernel sums ``exp(-cost)`` over every monotone alignment of two
sequences, where an alignment advances by (0,1), (1,0) or (1,1) at each step
and its cost adds the local divergence of every matched pair. The sum is
evaluated by an O(mn) dynamic program; :func:`enumerate_alignments` walks the
alignments explicitly and serves as the reference for small inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .dominant import EntropySeries
from .errors import CapacityError, ShapeError, ValidationError

ORACLE_MAX_LEN = 8
STEPS = ((0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class Alignment:
    """Zero-based index paths; both start at 0 and end at m-1 / n-1."""
    p: tuple
    q: tuple

    def __len__(self):
        return len(self.p)

    def validate(self, m: int, n: int) -> None:
        if len(self.p) != len(self.q) or not self.p:
            raise ValidationError("alignment coordinates must be nonempty and of equal length")
        if (self.p[0], self.q[0]) != (0, 0) or (self.p[-1], self.q[-1]) != (m - 1, n - 1):
            raise ValidationError(f"alignment must run from (0, 0) to ({m - 1}, {n - 1})")
        for i in range(len(self.p) - 1):
            if (self.p[i + 1] - self.p[i], self.q[i + 1] - self.q[i]) not in STEPS:
                raise ValidationError(f"illegal alignment step at position {i}")


def _as_sequence(P) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if P.ndim != 2 or P.shape[0] == 0:
        raise ShapeError(f"expected a nonempty sequence of vectors, got shape {P.shape}")
    return P


def _pair(P, Q):
    P, Q = _as_sequence(P), _as_sequence(Q)
    if P.shape[1] != Q.shape[1]:
        raise ShapeError(f"vector dimension mismatch: {P.shape[1]} vs {Q.shape[1]}")
    return np.ascontiguousarray(P), np.ascontiguousarray(Q)


def squared_euclidean(x, y) -> float:
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return float(d @ d)


def alignment_cost(P, Q, alignment: Alignment, phi=squared_euclidean) -> float:
    P, Q = _pair(P, Q)
    alignment.validate(len(P), len(Q))
    return float(sum(phi(P[i], Q[j]) for i, j in zip(alignment.p, alignment.q)))


def enumerate_alignments(m: int, n: int) -> list[Alignment]:
    """Every alignment between lengths m and n (brute force; m, n <= 8)."""
    if m < 1 or n < 1:
        raise ShapeError("lengths must be >= 1")
    if m > ORACLE_MAX_LEN or n > ORACLE_MAX_LEN:
        raise CapacityError(f"enumeration limited to lengths <= {ORACLE_MAX_LEN}")
    out = []

    def walk(path):
        i, j = path[-1]
        if (i, j) == (m - 1, n - 1):
            out.append(Alignment(tuple(p for p, _ in path), tuple(q for _, q in path)))
            return
        for di, dj in STEPS:
            if i + di < m and j + dj < n:
                path.append((i + di, j + dj))
                walk(path)
                path.pop()

    walk([(0, 0)])
    return out


def delannoy(a: int, b: int) -> int:
    """Closed form ``sum_k C(a,k) C(b,k) 2^k``."""
    return sum(math.comb(a, k) * math.comb(b, k) * 2 ** k for k in range(min(a, b) + 1))


def gak_bruteforce(P, Q, phi=squared_euclidean) -> float:
    P, Q = _pair(P, Q)
    return float(sum(math.exp(-alignment_cost(P, Q, al, phi))
                     for al in enumerate_alignments(len(P), len(Q))))


def _scale(bandwidth: float) -> float:
    if not bandwidth > 0:
        raise ValidationError("divergence bandwidth must be > 0")
    return 1.0 / (bandwidth * bandwidth)


def log_gak(P, Q, bandwidth: float = 1.0) -> float:
    """Logarithm of :func:`gak`; never overflows."""
    P, Q = _pair(P, Q)
    return float(_kernels.log_gak(P, Q, _scale(bandwidth)))


def gak(P, Q, bandwidth: float = 1.0) -> float:
    """Global alignment kernel with ``phi(x, y) = ||x - y||^2 / bandwidth^2``.

    ``bandwidth=1`` is the plain squared Euclidean divergence. Short sequences
    use the direct recursion; sequences longer than 32, or pairs whose
    local kernel would underflow, are run in log space and exponentiated at
    the end (which may give ``inf`` for very long similar sequences; use
    :func:`log_gak` there).
    """
    P, Q = _pair(P, Q)
    scale = _scale(bandwidth)
    phi = _kernels.sq_dist_matrix(P, Q, scale)
    if _kernels.needs_log_space(phi):
        logk = float(_kernels.gak_log(phi))
        return math.exp(logk) if logk < 709.0 else math.inf
    return float(_kernels.gak_linear(phi))


def _series_matrix(S) -> np.ndarray:
    return S.columns if isinstance(S, EntropySeries) else np.asarray(S, dtype=float)


def edtwk(Sp, Sq, bandwidth: float = 1.0) -> float:
    """EDTWK between two entropy series: GAK with one entropy vector per step."""
    A, B = _series_matrix(Sp), _series_matrix(Sq)
    if A.shape != B.shape:
        raise ShapeError(f"entropy series shapes differ: {A.shape} vs {B.shape}")
    return gak(A, B, bandwidth)


@dataclass(frozen=True)
class KernelMatrix:
    values: np.ndarray
    labels: tuple
    log_values: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))


def kernel_matrix(series: Sequence, bandwidth: float = 1.0, labels=None) -> KernelMatrix:
    """EDTWK Gram matrix, one evaluation per unordered pair."""
    series = list(series)
    if len(series) < 2:
        raise ShapeError("need at least 2 series")
    mats = [_series_matrix(s) for s in series]
    if len({m.shape for m in mats}) != 1:
        raise ShapeError("entropy series have inconsistent shapes")
    X = np.stack(mats)
    if labels is None:
        labels = [s.t if isinstance(s, EntropySeries) else i for i, s in enumerate(series)]
    logK = _kernels.log_gram(np.ascontiguousarray(X), _scale(bandwidth))
    with np.errstate(over="ignore"):
        K = np.exp(logK)
    return KernelMatrix(K, labels, logK)


def normalize_kernel(K: KernelMatrix | np.ndarray) -> KernelMatrix:
    """``k(p,q) / sqrt(k(p,p) k(q,q))``, computed in log space when available."""
    if isinstance(K, KernelMatrix):
        labels, values, logv = K.labels, K.values, K.log_values
    else:
        values = np.asarray(K, dtype=float)
        labels, logv = tuple(range(values.shape[0])), None
    if logv is not None:
        d = np.diag(logv)
        if not np.all(np.isfinite(d)):
            raise ValidationError("kernel diagonal must be strictly positive")
        N = np.exp(logv - 0.5 * (d[:, None] + d[None, :]))
    else:
        d = np.diag(values)
        if np.any(d <= 0):
            raise ValidationError("kernel diagonal must be strictly positive")
        N = values / np.sqrt(np.outer(d, d))
    N = 0.5 * (N + N.T)
    np.fill_diagonal(N, 1.0)
    return KernelMatrix(N, labels)


def min_eigen_ratio(K) -> float:
    """min eigenvalue / max eigenvalue: the PSD diagnostic."""
    vals = np.linalg.eigvalsh(K.values if isinstance(K, KernelMatrix) else K)
    return float(vals[0] / vals[-1])
