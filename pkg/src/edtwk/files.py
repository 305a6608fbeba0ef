"""CSV/SVG readers and writers for every pipeline artifact.

All floats are written with 12 significant digits.
"""
from __future__ import annotations

import csv
import hashlib
from pathlib import Path

import numpy as np

from .errors import ParseError


def fmt(x) -> str:
    return format(float(x), ".12g")


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


# -- stacked per-snapshot matrices (networks, commute times) -----------------

def write_stacked(path, ts, tickers, matrices) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["t", "asset", *tickers])
        for t, M in zip(ts, matrices):
            for name, row in zip(tickers, M):
                w.writerow([int(t), name, *map(fmt, row)])


def read_stacked(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    if header[:2] != ["t", "asset"]:
        raise ParseError(f"{path}: expected header starting with t,asset", 1)
    tickers = header[2:]
    n = len(tickers)
    body = rows[1:]
    if len(body) % n:
        raise ParseError(f"{path}: row count {len(body)} is not a multiple of {n}")
    ts, mats = [], []
    for k in range(0, len(body), n):
        block = body[k:k + n]
        ts.append(int(block[0][0]))
        mats.append(np.array([[float(v) for v in r[2:]] for r in block]))
    return np.array(ts), tickers, mats


# -- entropy trace -------------------------------------------------------------

ENTROPY_HEAD = ["t", "H_S", "|S1|"]


def write_entropy(path, trace, tickers) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow([*ENTROPY_HEAD, *tickers])
        for t, h, s, v in zip(trace.t, trace.entropy, trace.support_size, trace.vectors):
            w.writerow([int(t), fmt(h), int(s), *map(fmt, v)])


def read_entropy(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if rows[0][:3] != ENTROPY_HEAD:
        raise ParseError(f"{path}: expected header {','.join(ENTROPY_HEAD)},...", 1)
    tickers = rows[0][3:]
    body = rows[1:]
    t = np.array([int(r[0]) for r in body])
    H = np.array([float(r[1]) for r in body])
    S = np.array([int(r[2]) for r in body])
    V = np.array([[float(x) for x in r[3:]] for r in body]).reshape(len(body), len(tickers))
    return t, H, S, V, tickers


# -- kernels -------------------------------------------------------------------

def write_square(path, labels, M) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["label", *labels])
        for lab, row in zip(labels, M):
            w.writerow([lab, *map(fmt, row)])


def read_square(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    labels = rows[0][1:]
    M = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    if M.shape != (len(labels), len(labels)):
        raise ParseError(f"{path}: matrix is {M.shape}, header names {len(labels)} labels")
    return labels, M


def write_triplets(path, labels, M) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["p", "q", "value"])
        for i, a in enumerate(labels):
            for j, b in enumerate(labels):
                w.writerow([a, b, fmt(M[i, j])])


# -- embeddings ------------------------------------------------------------------

def write_embedding(path, labels, points) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["label", *(f"x{i + 1}" for i in range(points.shape[1]))])
        for lab, p in zip(labels, points):
            w.writerow([lab, *map(fmt, p)])


def read_embedding(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    labels = [r[0] for r in rows[1:]]
    d = len(rows[0]) - 1
    P = np.array([[float(v) for v in r[1:]] for r in rows[1:]]).reshape(len(labels), d)
    return labels, P


def _ramp(u):
    # blue -> red through purple
    r = int(round(40 + 200 * u))
    b = int(round(220 - 180 * u))
    return f"#{r:02x}30{b:02x}"


def write_scatter_svg(path, points, size=480, pad=30) -> None:
    """Scatter of the first two coordinates, coloured from early (blue) to late (red)."""
    P = np.zeros((points.shape[0], 2))
    P[:, :min(2, points.shape[1])] = points[:, :2]
    lo, hi = P.min(axis=0), P.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    xy = pad + (P - lo) / span * (size - 2 * pad)
    xy[:, 1] = size - xy[:, 1]
    n = len(P)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<rect width="{size}" height="{size}" fill="white"/>']
    if n > 1:
        path_d = " ".join(f"{'M' if i == 0 else 'L'}{x:.2f},{y:.2f}" for i, (x, y) in enumerate(xy))
        parts.append(f'<path d="{path_d}" fill="none" stroke="#bbbbbb" stroke-width="0.5"/>')
    for i, (x, y) in enumerate(xy):
        u = i / (n - 1) if n > 1 else 0.0
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{_ramp(u)}"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
