"""Dominant sets by replicator dynamics and the entropies derived from them."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .commute import CommuteTimeMatrix
from .errors import ConfigError, DegenerateStateError, ShapeError, ValidationError

AFFINITY_MODES = ("raw", "neg-exp", "max-minus")
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000
DEFAULT_SUPPORT_EPS = 1e-6
DEFAULT_KKT_TOL = 1e-6
DEFAULT_WINDOW = 28


def affinity_transform(C, mode: str = "neg-exp", sigma: float | None = None) -> np.ndarray:
    """Turn a commute-time matrix into a zero-diagonal affinity matrix.

    ``raw`` keeps the distances as they are, ``neg-exp`` maps them through
    ``exp(-C / sigma)`` (``sigma`` defaults to the mean off-diagonal value)
    and ``max-minus`` uses ``max(C) - C``.
    """
    C = np.asarray(C.values if isinstance(C, CommuteTimeMatrix) else C, dtype=float)
    n = C.shape[0]
    off = ~np.eye(n, dtype=bool)
    if mode == "raw":
        W = C.copy()
    elif mode == "neg-exp":
        if sigma is None:
            sigma = float(C[off].mean()) if n > 1 else 1.0
        if not sigma > 0:
            raise ConfigError(f"neg-exp bandwidth must be > 0, got {sigma}")
        W = np.exp(-C / sigma)
    elif mode == "max-minus":
        W = C.max() - C
    else:
        raise ConfigError(f"unknown affinity mode {mode!r}; choose from {AFFINITY_MODES}")
    np.fill_diagonal(W, 0.0)
    return W


@dataclass(frozen=True)
class DominantDistribution:
    a: np.ndarray
    support: np.ndarray      # S1, sorted vertex indices with a_i > eps
    complement: np.ndarray   # S2
    objective: float
    iterations: int
    converged: bool
    eps: float = DEFAULT_SUPPORT_EPS
    # per-iterate objective a^T W a, starting at the barycenter
    history: np.ndarray = field(default=None, repr=False)
    max_sum_error: float = 0.0
    min_entry: float = 0.0

    def kkt_residuals(self, W) -> tuple[float, float]:
        """(max |(Wa)_i - a'Wa| on S1, max positive excess (Wa)_i - a'Wa on S2)."""
        Wa = np.asarray(W) @ self.a
        f = float(self.a @ Wa)
        on = float(np.abs(Wa[self.support] - f).max()) if self.support.size else 0.0
        off = float(np.maximum(Wa[self.complement] - f, 0.0).max()) if self.complement.size else 0.0
        return on, off


def _check_affinity(W):
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValidationError(f"affinity must be square, got {W.shape}")
    if not np.array_equal(W, W.T):
        raise ValidationError("affinity must be symmetric")
    if np.any(W < 0) or not np.all(np.isfinite(W)):
        raise ValidationError("affinity must be finite and nonnegative")
    if np.any(np.diag(W) != 0):
        raise ValidationError("affinity must have a zero diagonal")
    return W


def replicator_step(W, a) -> np.ndarray:
    """One update ``a_i <- a_i (Wa)_i / a'Wa``."""
    W = np.asarray(W, dtype=float)
    a = np.asarray(a, dtype=float)
    Wa = W @ a
    f = float(a @ Wa)
    if not f > 0:
        raise DegenerateStateError("a'Wa = 0: replicator update undefined at this state")
    b = a * Wa / f
    return b / b.sum()


def dominant_distribution(W, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                          eps: float = DEFAULT_SUPPORT_EPS) -> DominantDistribution:
    """Replicator dynamics from the barycenter until the sup-norm step < ``tol``.

    Non-convergence is reported through ``converged=False`` rather than raised.
    """
    W = _check_affinity(W)
    if not np.any(W):
        raise ValidationError("affinity matrix is all zero")
    if not tol > 0 or max_iter < 1 or not 0 <= eps < 1:
        raise ConfigError("need tol > 0, max_iter >= 1, 0 <= eps < 1")
    n = W.shape[0]
    a0 = np.full(n, 1.0 / n)
    history = np.empty(max_iter + 1)
    a, k, status, sum_err, min_entry = _kernels.replicator(
        np.ascontiguousarray(W), a0, float(tol), int(max_iter), history)
    if status == _kernels.DEGENERATE:
        raise DegenerateStateError("replicator reached a state with a'Wa = 0")
    support = np.flatnonzero(a > eps)
    complement = np.flatnonzero(a <= eps)
    return DominantDistribution(
        a=a, support=support, complement=complement,
        objective=float(history[k]), iterations=int(k),
        converged=status == _kernels.CONVERGED, eps=eps,
        history=history[:k + 1].copy(), max_sum_error=float(sum_err),
        min_entry=float(min_entry))


def shannon_entropy(a) -> float:
    """``-sum a_i ln a_i`` in nats, with ``0 ln 0 = 0``."""
    a = np.asarray(a, dtype=float)
    pos = a[a > 0]
    return float(-(pos * np.log(pos)).sum())


def sub_entropies(dist: DominantDistribution) -> np.ndarray:
    """Per-vertex ``-a_i ln a_i`` on the support, exactly 0 elsewhere."""
    values = np.zeros_like(dist.a)
    s = dist.support
    values[s] = -dist.a[s] * np.log(dist.a[s])
    return values


@dataclass(frozen=True)
class EntropySeries:
    t: int
    columns: np.ndarray  # (w, n_vertices); row s is E_{t-w+1+s}

    @property
    def width(self) -> int:
        return self.columns.shape[0]


def entropy_series(vectors, t: int, w: int = DEFAULT_WINDOW) -> EntropySeries:
    """Stack ``E_{t-w+1} .. E_t`` (rows of ``vectors``) into one series."""
    V = np.asarray(vectors, dtype=float)
    if w < 1:
        raise ShapeError("window must be >= 1")
    if t - w + 1 < 0 or t >= V.shape[0]:
        raise ShapeError(f"need vectors {t - w + 1}..{t}, have 0..{V.shape[0] - 1}")
    return EntropySeries(t, V[t - w + 1:t + 1].copy())


def all_entropy_series(vectors, w: int = DEFAULT_WINDOW) -> list[EntropySeries]:
    V = np.asarray(vectors, dtype=float)
    return [entropy_series(V, t, w) for t in range(w - 1, V.shape[0])]

