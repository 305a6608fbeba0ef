"""Acceptance gate: one PASS/FAIL line per criterion, printed in the terminal summary."""
import os
import statistics
import time
import warnings

import numpy as np
import pytest

from conftest import random_affinity, random_connected_graph
from edtwk import cli, files
from edtwk.classify import StagedDataset, cross_validate, stage_labels
from edtwk.commute import commute_time_resistance_oracle, commute_time_spectral
from edtwk.dominant import all_entropy_series, dominant_distribution
from edtwk.embedding import distance_stress, kpca
from edtwk.gak import (delannoy, enumerate_alignments, gak, gak_bruteforce, kernel_matrix,
                       normalize_kernel)
from edtwk.market import parse_prices
from edtwk.pipeline import edtwk_kernel, entropy_trace
from edtwk.scenarios import crisis_market, smooth_market, two_regime_market


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def test_1_gak_matches_enumeration(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(200):
        m, n, d = rng.integers(1, 7), rng.integers(1, 7), rng.integers(1, 6)
        P, Q = rng.normal(size=(m, d)), rng.normal(size=(n, d))
        worst = max(worst, rel_err(gak(P, Q), gak_bruteforce(P, Q)))
    counts_ok = all(len(enumerate_alignments(m, n)) == delannoy(m - 1, n - 1)
                    and gak(np.zeros((m, 1)), np.zeros((n, 1))) == delannoy(m - 1, n - 1)
                    for m in range(1, 9) for n in range(1, 9))
    secs = time.perf_counter() - t0
    verdict(1, worst < 1e-9 and counts_ok and secs < 10,
            f"max rel err {worst:.2e}, Delannoy counts {'ok' if counts_ok else 'MISMATCH'}, "
            f"{secs:.1f}s")


def test_2_commute_dual_forms(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 31))
        A = random_connected_graph(rng, n, rng.uniform(0.1, 0.9))
        S = commute_time_spectral(A).values
        R = commute_time_resistance_oracle(A).values
        off = ~np.eye(n, dtype=bool)
        worst = max(worst, float(np.max(np.abs(S[off] - R[off]) / R[off])))
    two = commute_time_spectral(np.array([[0.0, 1.0], [1.0, 0.0]])).values[0, 1]
    k3 = commute_time_spectral(np.ones((3, 3)) - np.eye(3)).values
    small_ok = abs(two - 2) < 1e-10 and np.all(np.abs(k3[~np.eye(3, dtype=bool)] - 4) < 1e-10)
    secs = time.perf_counter() - t0
    verdict(2, worst < 1e-8 and small_ok and secs < 10,
            f"max rel err {worst:.2e}, two-vertex {float(two)!r}, K3 max dev "
            f"{np.abs(k3[~np.eye(3, dtype=bool)] - 4).max():.1e}, {secs:.1f}s")


def _simplex_grid(n, step):
    m = int(round(1 / step))
    axes = np.indices((m + 1,) * (n - 1)).reshape(n - 1, -1).T
    axes = axes[axes.sum(axis=1) <= m]
    return np.column_stack([axes, m - axes.sum(axis=1)]) / m


def test_3_replicator(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    G = _simplex_grid(4, 0.02)
    sum_err, min_entry, worst_drop, worst_gap, worst_kkt = 0.0, 0.0, 0.0, -np.inf, 0.0
    for _ in range(50):
        W = random_affinity(rng, 4)
        d = dominant_distribution(W)
        sum_err = max(sum_err, d.max_sum_error)
        min_entry = min(min_entry, d.min_entry)
        worst_drop = max(worst_drop, float(-np.diff(d.history).min(initial=0.0)))
        grid = float(np.einsum("ki,ij,kj->k", G, W, G).max())
        worst_gap = max(worst_gap, grid - 0.01 - d.objective)
        worst_kkt = max(worst_kkt, *d.kkt_residuals(W))
    secs = time.perf_counter() - t0
    ok = (sum_err < 1e-12 and min_entry >= 0 and worst_drop <= 1e-12 and worst_gap <= 0
          and worst_kkt < 1e-6 and secs < 30)
    verdict(3, ok, f"|sum-1| {sum_err:.1e}, min a {min_entry:.1e}, objective drop "
                   f"{worst_drop:.1e}, grid-0.01 minus result {worst_gap:.3f}, "
                   f"KKT {worst_kkt:.1e}, {secs:.1f}s")


def test_4_crisis_entropy_drop(verdict):
    t0 = time.perf_counter()
    zs = []
    for seed in range(10):
        tr = entropy_trace(crisis_market(seed))
        pre = tr.entropy[tr.t < 300]
        inside = tr.entropy[(tr.t >= 300) & (tr.t < 360)]
        zs.append((pre.mean() - inside.mean()) / pre.std())
    secs = time.perf_counter() - t0
    hits = sum(z >= 3 for z in zs)
    verdict(4, hits >= 9 and secs < 120,
            f"{hits}/10 seeds drop >= 3 sd (z = {', '.join(f'{z:.2f}' for z in zs)}), "
            f"{secs:.1f}s")


def test_5_normalized_kernel_psd(verdict):
    t0 = time.perf_counter()
    tr = entropy_trace(two_regime_market(5))
    series = all_entropy_series(tr.vectors, 28)
    pick = np.linspace(0, len(series) - 1, 30).round().astype(int)
    N = normalize_kernel(kernel_matrix([series[i] for i in pick])).values
    ev = np.linalg.eigvalsh(N)
    ratio = ev[0] / ev[-1]
    secs = time.perf_counter() - t0
    verdict(5, ratio >= -1e-8 and secs < 60,
            f"min/max eigenvalue {ratio:.2e} over 30 windows, {secs:.1f}s")


def test_6_trajectory_coherence(verdict):
    tr = entropy_trace(smooth_market(0))
    K = normalize_kernel(edtwk_kernel(tr))
    X = kpca(K, 2).points
    ordered = distance_stress(X)
    rng = np.random.default_rng(6)
    wins = sum(ordered < distance_stress(X[rng.permutation(len(X))]) for _ in range(100))
    line = distance_stress(np.outer(np.arange(12.0), [0.6, -0.8]))
    verdict(6, wins >= 95 and line == 1.0,
            f"DS ordered {ordered:.4f} beats {wins}/100 permutations, collinear DS {line!r}")


@pytest.mark.skipif(not os.environ.get("EDTWK_MARKET_CSV"),
                    reason="set EDTWK_MARKET_CSV to a date,<ticker> price file to run")
def test_6_market_data_raw_vs_neg_exp(verdict):
    with open(os.environ["EDTWK_MARKET_CSV"], encoding="utf-8", newline="") as fh:
        prices = parse_prices(fh, "forward-fill")
    ds = {}
    for mode in ("neg-exp", "raw"):
        K = normalize_kernel(edtwk_kernel(entropy_trace(prices, affinity=mode)))
        ds[mode] = distance_stress(kpca(K, 2).points)
    verdict("6b", abs(ds["neg-exp"] - 1) < abs(ds["raw"] - 1),
            f"DS neg-exp {ds['neg-exp']:.4f} vs raw {ds['raw']:.4f}")


def test_7_stage_classification(verdict):
    t0 = time.perf_counter()
    tr = entropy_trace(two_regime_market(7))
    K = normalize_kernel(edtwk_kernel(tr, count=100)).values
    ds = StagedDataset(K, stage_labels(100, 10), 10)
    a = cross_validate(ds, 3, 10, 10, seed=0)
    b = cross_validate(ds, 3, 10, 10, seed=0)
    same = a.fold_rows == b.fold_rows and a.summary() == b.summary()
    secs = time.perf_counter() - t0
    verdict(7, a.mean > 0.3 and same and secs < 120,
            f"RKHS 3-NN accuracy {a.summary()} (chance 0.1), "
            f"{'deterministic' if same else 'NOT deterministic'}, {secs:.1f}s")


def _median_time(fn, runs=5):
    out = []
    for _ in range(runs):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def test_8_complexity(verdict):
    rng = np.random.default_rng(8)
    graphs = {n: random_connected_graph(rng, n, 0.5) for n in (100, 200)}
    commute_time_spectral(graphs[100])
    t_n = {n: _median_time(lambda: commute_time_spectral(A)) for n, A in graphs.items()}
    seqs = {w: (rng.random((w, 20)), rng.random((w, 20))) for w in (100, 200)}
    gak(*seqs[100])
    t_w = {w: _median_time(lambda: gak(P, Q)) for w, (P, Q) in seqs.items()}
    rn, rw = t_n[200] / t_n[100], t_w[200] / t_w[100]
    verdict(8, rn <= 10 and rw <= 5,
            f"commute time n 100->200 x{rn:.2f} (limit 10), GAK w 100->200 x{rw:.2f} (limit 5)")


def test_9_end_to_end_determinism(tmp_path, verdict):
    stages = ["synth", "networks", "commute", "entropy", "kernel", "embed", "stress",
              "classify", "report"]
    codes = []
    for run in ("a", "b"):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            codes += [cli.main([s, "--out", str(tmp_path / run), "--seed", "9"]) for s in stages]
    names = sorted(p.name for p in (tmp_path / "a").glob("*.csv"))
    diff = [n for n in names
            if files.sha256(tmp_path / "a" / n) != files.sha256(tmp_path / "b" / n)]
    verdict(9, not any(codes) and not diff and len(names) == 9,
            f"{len(names)} CSVs compared, {len(diff)} differ, exit codes {sorted(set(codes))}")
