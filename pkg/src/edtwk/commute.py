"""Commute-time matrices of weighted graphs.

Two independent routes are provided: the Laplacian eigen-expansion used by the
pipeline and an effective-resistance route through the Moore-Penrose
pseudoinverse, kept as a cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import SingularityError, ValidationError
from .market import NetworkSnapshot

CONNECTIVITY_TOL = 1e-10


@dataclass(frozen=True)
class CommuteTimeMatrix:
    values: np.ndarray
    volume: float


def _adjacency(snapshot):
    A = snapshot.adjacency if isinstance(snapshot, NetworkSnapshot) else snapshot
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"adjacency must be square, got shape {A.shape}")
    if not np.array_equal(A, A.T):
        raise ValidationError("adjacency must be symmetric")
    if np.any(np.diag(A) != 0):
        raise ValidationError("adjacency must have a zero diagonal")
    if np.any(A < 0) or not np.all(np.isfinite(A)):
        raise ValidationError("adjacency must be finite and nonnegative")
    return A


def laplacian(adjacency) -> np.ndarray:
    """Unnormalized Laplacian ``D - A``."""
    A = _adjacency(adjacency)
    return np.diag(A.sum(axis=1)) - A


def _components_message(A):
    n_comp, labels = connected_components(A > 0, directed=False)
    groups = [np.flatnonzero(labels == c).tolist() for c in range(n_comp)]
    return groups, f"graph is disconnected: {n_comp} components {groups}"


def _check_connected(A, lam):
    lam_max = lam[-1] if lam.size else 0.0
    if A.shape[0] == 1:
        return
    if lam_max <= 0 or lam[1] <= CONNECTIVITY_TOL * lam_max:
        groups, msg = _components_message(A)
        if len(groups) == 1:
            msg = (f"Fiedler value {lam[1]:.3e} below tolerance "
                   f"{CONNECTIVITY_TOL:g} * {lam_max:.3e}; graph treated as disconnected")
        raise SingularityError(msg, components=groups)


def commute_time_spectral(snapshot, ridge: float = 0.0) -> CommuteTimeMatrix:
    """``vol * sum_{j>=2} (phi_j(u) - phi_j(v))**2 / lambda_j``.

    ``ridge`` > 0 replaces each lambda_j by lambda_j + ridge, which departs
    from the exact commute time but tolerates nearly disconnected graphs.
    """
    A = _adjacency(snapshot)
    deg = A.sum(axis=1)
    vol = float(deg.sum())
    lam, phi = np.linalg.eigh(np.diag(deg) - A)  # ascending
    if ridge < 0:
        raise ValidationError("ridge must be >= 0")
    if ridge == 0.0:
        _check_connected(A, lam)
    Y = phi[:, 1:] / np.sqrt(lam[1:] + ridge)
    G = Y @ Y.T
    g = np.diag(G)
    C = vol * (g[:, None] + g[None, :] - 2.0 * G)
    return CommuteTimeMatrix(_tidy(C), vol)


def commute_time_resistance_oracle(snapshot) -> CommuteTimeMatrix:
    """``vol * (L+_uu + L+_vv - 2 L+_uv)`` from the pseudoinverse."""
    A = _adjacency(snapshot)
    deg = A.sum(axis=1)
    vol = float(deg.sum())
    L = np.diag(deg) - A
    if A.shape[0] > 1:
        n_comp, _ = connected_components(A > 0, directed=False)
        if n_comp > 1:
            groups, msg = _components_message(A)
            raise SingularityError(msg, components=groups)
    Lp = np.linalg.pinv(L, hermitian=True)
    d = np.diag(Lp)
    C = vol * (d[:, None] + d[None, :] - 2.0 * Lp)
    return CommuteTimeMatrix(_tidy(C), vol)


def _tidy(C):
    C = 0.5 * (C + C.T)
    np.fill_diagonal(C, 0.0)
    return np.maximum(C, 0.0)
