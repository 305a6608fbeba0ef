"""Stage labelling and k-fold cross-validation with an RKHS nearest-neighbour rule.

The classifier only needs the Gram matrix: distances come from
``d(i, j)^2 = K_ii + K_jj - 2 K_ij``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError, ValidationError


@dataclass(frozen=True)
class StagedDataset:
    kernel: np.ndarray
    labels: np.ndarray
    n_stages: int

    def __post_init__(self):
        K = np.asarray(self.kernel, dtype=float)
        y = np.asarray(self.labels, dtype=int)
        if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] != y.size:
            raise ShapeError(f"kernel {K.shape} does not match {y.size} labels")
        object.__setattr__(self, "kernel", K)
        object.__setattr__(self, "labels", y)


def stage_labels(n_windows: int, n_stages: int) -> np.ndarray:
    """Contiguous equal blocks: window i gets stage ``i // (n_windows / n_stages)``."""
    if n_stages < 1 or n_windows < 1 or n_windows % n_stages:
        raise ShapeError(f"{n_windows} windows cannot be split into {n_stages} equal stages")
    return np.arange(n_windows) // (n_windows // n_stages)


def rkhs_distance(K, i: int, j: int) -> float:
    K = np.asarray(K)
    return math.sqrt(max(0.0, K[i, i] + K[j, j] - 2.0 * K[i, j]))


def rkhs_distance_matrix(K) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    d = np.diag(K)
    D2 = d[:, None] + d[None, :] - 2.0 * K
    D2 = 0.5 * (D2 + D2.T)
    np.fill_diagonal(D2, 0.0)
    return np.sqrt(np.maximum(D2, 0.0))


def stratified_folds(labels, n_folds: int, rng: np.random.Generator) -> np.ndarray:
    """Fold index per sample; each class is dealt round-robin after a shuffle."""
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    if n_folds < 2:
        raise ShapeError("need at least 2 folds")
    if n_folds > counts.min():
        raise ShapeError(f"{n_folds} folds exceed the smallest class size {counts.min()}")
    folds = np.empty(labels.size, dtype=int)
    offset = 0
    for c in classes:
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(idx.size)]
        folds[idx] = (offset + np.arange(idx.size)) % n_folds
        offset += idx.size
    return folds


def knn_predict(D, train, test, train_labels, k: int, n_classes: int) -> np.ndarray:
    """Majority vote among the k nearest training points.

    Equal distances keep index order; vote ties go to the lowest stage.
    """
    k = min(k, len(train))
    out = np.empty(len(test), dtype=int)
    for r, i in enumerate(test):
        order = np.argsort(D[i, train], kind="stable")[:k]
        votes = np.bincount(train_labels[order], minlength=n_classes)
        out[r] = int(np.argmax(votes))  # first max = lowest stage
    return out


@dataclass(frozen=True)
class CVResult:
    mean: float
    stderr: float
    repeat_accuracies: np.ndarray
    # (repeat, fold, accuracy) rows
    fold_rows: list = field(default_factory=list, repr=False)

    def summary(self) -> str:
        return f"{self.mean:.12g}±{self.stderr:.12g}"


def cross_validate(ds: StagedDataset, k_neighbors: int = 3, n_folds: int = 10,
                   n_repeats: int = 10, seed: int = 0) -> CVResult:
    """Repeated stratified k-fold accuracy of the RKHS k-NN rule.

    Each repeat draws its folds from its own child of ``SeedSequence(seed)``.
    The standard error is the sample std of the per-repeat accuracies over
    sqrt(n_repeats) (0 for a single repeat).
    """
    if k_neighbors < 1:
        raise ValidationError("k_neighbors must be >= 1")
    if n_repeats < 1:
        raise ValidationError("n_repeats must be >= 1")
    D = rkhs_distance_matrix(ds.kernel)
    y = ds.labels
    n_classes = int(max(ds.n_stages, y.max() + 1))
    rows = []
    accs = []
    for r, child in enumerate(np.random.SeedSequence(seed).spawn(n_repeats)):
        folds = stratified_folds(y, n_folds, np.random.default_rng(child))
        correct = 0
        for f in range(n_folds):
            test = np.flatnonzero(folds == f)
            train = np.flatnonzero(folds != f)
            pred = knn_predict(D, train, test, y[train], k_neighbors, n_classes)
            hits = int((pred == y[test]).sum())
            correct += hits
            rows.append((r, f, hits / test.size))
        accs.append(correct / y.size)
    accs = np.array(accs)
    stderr = float(accs.std(ddof=1) / math.sqrt(n_repeats)) if n_repeats > 1 else 0.0
    return CVResult(float(accs.mean()), stderr, accs, rows)
