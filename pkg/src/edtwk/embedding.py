"""Kernel PCA / classical MDS embeddings and the distance-stress score."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, ValidationError

POSITIVE_REL_TOL = 1e-10


@dataclass(frozen=True)
class Embedding:
    points: np.ndarray        # (n, d)
    eigenvalues: np.ndarray   # (d,), descending
    labels: tuple
    truncated: bool = False   # fewer than the requested dimensions were available
    spectrum: np.ndarray | None = None  # full eigenvalue list, descending

    @property
    def collinearity(self) -> float:
        """lambda_2 / lambda_1 over the full spectrum (0 means a perfect line)."""
        s = self.spectrum if self.spectrum is not None else self.eigenvalues
        if s.size < 2 or s[0] <= 0:
            return 0.0
        return float(max(s[1], 0.0) / s[0])


def _square_symmetric(M):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"expected a square matrix, got {M.shape}")
    if not np.allclose(M, M.T, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(M).max())):
        raise ValidationError("matrix must be symmetric")
    return 0.5 * (M + M.T)


def _double_center(M):
    M = M - M.mean(axis=0, keepdims=True)
    M = M - M.mean(axis=1, keepdims=True)
    return 0.5 * (M + M.T)


def center_matrix(C) -> np.ndarray:
    """``-1/2 (I - J/n) C (I - J/n)`` for a distance-like matrix C."""
    return -0.5 * _double_center(_square_symmetric(C))


def _eigen_embed(K, d, labels):
    if d < 1:
        raise ValidationError("embedding dimension must be >= 1")
    lam, vec = np.linalg.eigh(K)
    order = np.argsort(lam, kind="stable")[::-1]
    lam, vec = lam[order], vec[:, order]
    top = lam[0] if lam.size else 0.0
    positive = lam > POSITIVE_REL_TOL * max(top, 0.0) if top > 0 else np.zeros_like(lam, dtype=bool)
    keep = np.flatnonzero(positive)[:d]
    truncated = keep.size < d
    if truncated:
        warnings.warn(f"only {keep.size} positive eigenvalues available for a "
                      f"{d}-dimensional embedding", RuntimeWarning, stacklevel=3)
    V = vec[:, keep]
    # sign convention: largest-magnitude entry of each eigenvector is >= 0
    if V.size:
        idx = np.argmax(np.abs(V), axis=0)
        signs = np.where(V[idx, np.arange(V.shape[1])] < 0, -1.0, 1.0)
        V = V * signs
    points = V * np.sqrt(lam[keep])
    if labels is None:
        labels = tuple(range(K.shape[0]))
    return Embedding(points, lam[keep].copy(), tuple(labels), truncated, lam.copy())


def kpca(K, d: int = 2, labels=None) -> Embedding:
    """Kernel PCA of a Gram matrix: centre in feature space, keep top-d positive axes.

    Axes with negative eigenvalues are dropped.
    """
    from .gak import KernelMatrix
    if isinstance(K, KernelMatrix):
        labels = K.labels if labels is None else labels
        K = K.values
    K = _square_symmetric(K)
    return _eigen_embed(_double_center(K), d, labels)


def mds_vertices(C, d: int = 2, labels=None) -> Embedding:
    """Classical MDS of a vertex affinity/distance matrix (commute time or correlation)."""
    from .commute import CommuteTimeMatrix
    from .market import NetworkSnapshot
    if isinstance(C, CommuteTimeMatrix):
        C = C.values
    elif isinstance(C, NetworkSnapshot):
        C = C.adjacency
    return _eigen_embed(center_matrix(C), d, labels)


_TIE_RTOL = 1e-12


def distance_stress(points) -> float:
    """Squared predecessor distances over squared nearest-neighbour distances.

    The sum runs over every point but the first, in time order. A value of 1
    means each point's nearest neighbour is its predecessor; a predecessor
    tied with the nearest point (to 1e-12 relative) counts as nearest. Returns ``inf``
    (with a warning) when some point has an exact duplicate, making the
    denominator zero.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if n < 3:
        raise ShapeError("distance stress needs at least 3 points")
    diff = X[:, None, :] - X[None, :, :]
    D2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(D2, np.inf)
    t = np.arange(1, n)
    pred = D2[t, t - 1]
    near = D2[t].min(axis=1)
    # nearest-neighbour ties (up to rounding) go to the predecessor
    near = np.where(pred <= near * (1.0 + _TIE_RTOL), pred, near)
    num = float(pred.sum())
    den = float(near.sum())
    if den == 0.0:
        warnings.warn("distance stress undefined: coincident embedding points",
                      RuntimeWarning, stacklevel=2)
        return math.inf
    return num / den
