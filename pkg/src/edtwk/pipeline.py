"""End-to-end helpers: prices -> networks -> commute times -> entropies -> kernel."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import parallel_map
from .commute import commute_time_spectral
from .dominant import (DEFAULT_MAX_ITER, DEFAULT_SUPPORT_EPS, DEFAULT_TOL,
                       affinity_transform, all_entropy_series, dominant_distribution,
                       shannon_entropy, sub_entropies)
from .gak import kernel_matrix
from .market import DEFAULT_WIDTH, build_network_sequence


@dataclass
class EntropyTrace:
    t: np.ndarray          # snapshot end-day indices
    entropy: np.ndarray    # H_S per snapshot
    support_size: np.ndarray
    vectors: np.ndarray    # (n_snapshots, n_assets) sub-entropies
    converged: np.ndarray


def snapshot_entropy(adjacency, affinity="neg-exp", sigma=None, tol=DEFAULT_TOL,
                     max_iter=DEFAULT_MAX_ITER, eps=DEFAULT_SUPPORT_EPS, ridge=0.0):
    C = commute_time_spectral(adjacency, ridge=ridge)
    W = affinity_transform(C, affinity, sigma)
    return dominant_distribution(W, tol=tol, max_iter=max_iter, eps=eps)


def entropy_trace(prices, width=DEFAULT_WIDTH, affinity="neg-exp", sigma=None,
                  tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, eps=DEFAULT_SUPPORT_EPS,
                  ridge=0.0, snapshots=None) -> EntropyTrace:
    if snapshots is None:
        snapshots = build_network_sequence(prices, width)

    def one(snap):
        return snapshot_entropy(snap.adjacency, affinity, sigma, tol, max_iter, eps, ridge)

    dists = parallel_map(one, snapshots)
    return EntropyTrace(
        t=np.array([s.t for s in snapshots]),
        entropy=np.array([shannon_entropy(d.a) for d in dists]),
        support_size=np.array([d.support.size for d in dists]),
        vectors=np.stack([sub_entropies(d) for d in dists]),
        converged=np.array([d.converged for d in dists]),
    )


def edtwk_kernel(trace: EntropyTrace, w=28, bandwidth=1.0, start=0, count=None):
    """Gram matrix over entropy series ending at each available snapshot.

    ``start``/``count`` select a contiguous block of those series.
    """
    series = all_entropy_series(trace.vectors, w)
    stop = len(series) if count is None else start + count
    series = series[start:stop]
    labels = [int(trace.t[s.t]) for s in series]
    return kernel_matrix(series, bandwidth, labels=labels)
