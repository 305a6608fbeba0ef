"""Batch command line: ``edtwk <stage> [--config FILE] [--key value ...]``.

Each stage reads the files written by the previous one from ``--out`` and
writes its own CSVs plus ``<stage>.manifest.json``.
"""
from __future__ import annotations

import argparse
import json
import logging
import platform
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__, _accel, files
from .classify import StagedDataset, cross_validate, stage_labels
from .commute import commute_time_spectral
from .dominant import AFFINITY_MODES, affinity_transform, all_entropy_series
from .embedding import distance_stress, kpca
from .errors import (ConfigError, DegenerateStateError, EDTWKError, PrerequisiteError,
                     SingularityError)
from .gak import kernel_matrix, min_eigen_ratio, normalize_kernel
from .market import (SynthConfig, build_network_sequence, format_regimes, parse_prices,
                     parse_regimes, synth_market, write_prices)
from .pipeline import EntropyTrace, snapshot_entropy

log = logging.getLogger("edtwk")

EXIT_OK, EXIT_VALIDATION, EXIT_PREREQ, EXIT_NUMERIC = 0, 2, 3, 4

STAGES = ("ingest", "synth", "networks", "commute", "entropy", "kernel",
          "embed", "stress", "classify", "report")


def _pos(x):
    return x > 0


def _nonneg(x):
    return x >= 0


@dataclass
class PipelineConfig:
    out: str = "edtwk-out"
    input: str = ""
    missing: str = "reject"
    # synthetic market
    n_assets: int = 20
    n_days: int = 400
    regimes: str = "200:260:0.95:0.3"
    noise_scale: float = 0.02
    seed: int = 0
    # networks / commute
    width: int = 28
    ridge: float = 0.0
    # dominant sets
    affinity: str = "neg-exp"
    sigma: str = "auto"
    tol: float = 1e-10
    max_iter: int = 10_000
    eps: float = 1e-6
    # kernel
    window: int = 28
    bandwidth: float = 1.0
    # embedding
    dim: int = 2
    # classification
    stages: int = 10
    folds: int = 10
    k: int = 3
    repeats: int = 10
    classify_start: int = 0
    classify_windows: int = 100

    RULES = {
        "missing": (lambda v: v in ("reject", "forward-fill"), "reject or forward-fill"),
        "n_assets": (lambda v: v >= 2, ">= 2"),
        "n_days": (lambda v: v >= 2, ">= 2"),
        "noise_scale": (_pos, "> 0"),
        "width": (lambda v: v >= 2, ">= 2"),
        "ridge": (_nonneg, ">= 0"),
        "affinity": (lambda v: v in AFFINITY_MODES, " | ".join(AFFINITY_MODES)),
        "sigma": (lambda v: v == "auto" or float(v) > 0, "auto or > 0"),
        "tol": (_pos, "> 0"),
        "max_iter": (lambda v: v >= 1, ">= 1"),
        "eps": (lambda v: 0 <= v < 1, "in [0, 1)"),
        "window": (lambda v: v >= 1, ">= 1"),
        "bandwidth": (_pos, "> 0"),
        "dim": (lambda v: v >= 1, ">= 1"),
        "stages": (lambda v: v >= 1, ">= 1"),
        "folds": (lambda v: v >= 2, ">= 2"),
        "k": (lambda v: v >= 1, ">= 1"),
        "repeats": (lambda v: v >= 1, ">= 1"),
        "classify_start": (_nonneg, ">= 0"),
        "classify_windows": (lambda v: v >= 2, ">= 2"),
    }

    def validate(self) -> None:
        for name, (ok, desc) in self.RULES.items():
            value = getattr(self, name)
            try:
                good = ok(value)
            except (TypeError, ValueError):
                good = False
            if not good:
                raise ConfigError(f"{name}={value!r}: must be {desc}")
        if self.classify_windows % self.stages:
            raise ConfigError(f"classify_windows={self.classify_windows} is not divisible "
                              f"by stages={self.stages}")
        if self.folds > self.classify_windows // self.stages:
            raise ConfigError(f"folds={self.folds} exceeds the stage size "
                              f"{self.classify_windows // self.stages}")
        self.synth_config()

    def synth_config(self) -> SynthConfig:
        return SynthConfig(self.n_assets, self.n_days, parse_regimes(self.regimes),
                           self.noise_scale, self.seed)

    def sigma_value(self):
        return None if self.sigma == "auto" else float(self.sigma)

    def set(self, key: str, raw: str) -> None:
        key = key.strip().replace("-", "_")
        types = {f.name: f.type for f in fields(self)}
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        kind = {"int": int, "float": float, "str": str}[types[key]]
        try:
            setattr(self, key, kind(raw.strip()))
        except ValueError:
            raise ConfigError(f"{key}: cannot parse {raw!r} as {types[key]}") from None


def load_config(path) -> PipelineConfig:
    cfg = PipelineConfig()
    if path is None:
        return cfg
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        cfg.set(key, value)
    return cfg


# ---------------------------------------------------------------------------
# stage plumbing

class Stage:
    def __init__(self, name, cfg, strict=False):
        self.name = name
        self.cfg = cfg
        self.strict = strict
        self.out = Path(cfg.out)
        self.inputs = {}
        self.outputs = {}
        self.diagnostics = {}
        self.t0 = time.perf_counter()

    def need(self, filename):
        path = self.out / filename
        if not path.is_file():
            raise PrerequisiteError(
                f"stage '{self.name}' needs {path}; run the stage that produces it first")
        self.inputs[filename] = files.sha256(path)
        return path

    def target(self, filename):
        self.out.mkdir(parents=True, exist_ok=True)
        self.outputs[filename] = None
        return self.out / filename

    def finish(self):
        for name in self.outputs:
            self.outputs[name] = files.sha256(self.out / name)
        manifest = {
            "stage": self.name,
            "config": asdict(self.cfg),
            "versions": _versions(),
            "numba": _accel.USE_NUMBA,
            "threads": _accel.num_threads(),
            "seconds": round(time.perf_counter() - self.t0, 6),
            "inputs": self.inputs,
            "outputs": self.outputs,
            "diagnostics": self.diagnostics,
        }
        path = self.out / f"{self.name}.manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _versions():
    import scipy
    out = {"edtwk": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
           "python": platform.python_version()}
    if _accel.HAVE_NUMBA:
        out["numba"] = _accel.numba.__version__
    return out


def _read_prices(stage):
    with open(stage.need("prices.csv"), encoding="utf-8", newline="") as fh:
        return parse_prices(fh)


def run_ingest(st):
    cfg = st.cfg
    if not cfg.input:
        raise ConfigError("ingest needs input=<price csv>")
    src = Path(cfg.input)
    if not src.is_file():
        raise PrerequisiteError(f"input price file {src} does not exist")
    st.inputs[str(src)] = files.sha256(src)
    with open(src, encoding="utf-8", newline="") as fh:
        table = parse_prices(fh, cfg.missing)
    with open(st.target("prices.csv"), "w", encoding="utf-8", newline="") as fh:
        write_prices(table, fh)
    st.diagnostics.update(n_days=table.n_days, n_assets=table.n_assets)


def run_synth(st):
    sc = st.cfg.synth_config()
    table = synth_market(sc)
    with open(st.target("prices.csv"), "w", encoding="utf-8", newline="") as fh:
        write_prices(table, fh)
    st.diagnostics.update(n_days=table.n_days, n_assets=table.n_assets,
                          regimes=format_regimes(sc.regimes))


def run_networks(st):
    table = _read_prices(st)
    seq = build_network_sequence(table, st.cfg.width)
    files.write_stacked(st.target("networks.csv"), [s.t for s in seq], table.tickers,
                        [s.adjacency for s in seq])
    st.diagnostics.update(n_snapshots=len(seq))


def run_commute(st):
    ts, tickers, mats = files.read_stacked(st.need("networks.csv"))
    ridge = st.cfg.ridge

    def one(A):
        A = 0.5 * (A + A.T)
        return commute_time_spectral(A, ridge=ridge).values

    out = _accel.parallel_map(one, mats)
    files.write_stacked(st.target("commute.csv"), ts, tickers, out)
    st.diagnostics.update(n_snapshots=len(out))


def run_entropy(st):
    cfg = st.cfg
    ts, tickers, mats = files.read_stacked(st.need("commute.csv"))
    sigma = cfg.sigma_value()

    def one(C):
        from .dominant import dominant_distribution, shannon_entropy, sub_entropies
        C = 0.5 * (C + C.T)
        W = affinity_transform(C, cfg.affinity, sigma)
        d = dominant_distribution(W, cfg.tol, cfg.max_iter, cfg.eps)
        return shannon_entropy(d.a), d.support.size, sub_entropies(d), d.converged

    res = _accel.parallel_map(one, mats)
    trace = EntropyTrace(ts, np.array([r[0] for r in res]), np.array([r[1] for r in res]),
                         np.stack([r[2] for r in res]), np.array([r[3] for r in res]))
    files.write_entropy(st.target("entropy.csv"), trace, tickers)
    n_bad = int((~trace.converged).sum())
    st.diagnostics.update(n_snapshots=len(ts), not_converged=n_bad)
    if n_bad:
        log.warning("%d of %d snapshots hit max_iter=%d before converging",
                    n_bad, len(ts), cfg.max_iter)
        if st.strict:
            raise DegenerateStateError(
                f"{n_bad} replicator runs did not converge within max_iter={cfg.max_iter}")


def run_kernel(st):
    cfg = st.cfg
    t, _, _, V, _ = files.read_entropy(st.need("entropy.csv"))
    if V.shape[0] < cfg.window + 1:
        raise ConfigError(f"window={cfg.window} leaves fewer than 2 entropy series "
                          f"from {V.shape[0]} snapshots")
    series = all_entropy_series(V, cfg.window)
    labels = [str(int(t[s.t])) for s in series]
    K = kernel_matrix(series, cfg.bandwidth, labels=labels)
    N = normalize_kernel(K)
    files.write_square(st.target("kernel.csv"), labels, K.values)
    files.write_square(st.target("kernel_normalized.csv"), labels, N.values)
    files.write_triplets(st.target("kernel_long.csv"), labels, N.values)
    ratio = min_eigen_ratio(N)
    st.diagnostics.update(n_windows=len(series), min_eigen_ratio=ratio,
                          psd=bool(ratio >= -1e-8))


def run_embed(st):
    labels, N = files.read_square(st.need("kernel_normalized.csv"))
    E = kpca(N, st.cfg.dim, labels)
    files.write_embedding(st.target("embedding.csv"), labels, E.points)
    files.write_scatter_svg(st.target("embedding.svg"), E.points)
    st.diagnostics.update(eigenvalues=[files.fmt(v) for v in E.eigenvalues],
                          truncated=E.truncated, collinearity=files.fmt(E.collinearity))


def run_stress(st):
    _, P = files.read_embedding(st.need("embedding.csv"))
    ds = distance_stress(P)
    line = f"DS={files.fmt(ds)}"
    st.target("stress.txt").write_text(line + "\n", encoding="utf-8")
    print(line)


def run_classify(st):
    cfg = st.cfg
    _, N = files.read_square(st.need("kernel_normalized.csv"))
    lo, hi = cfg.classify_start, cfg.classify_start + cfg.classify_windows
    if hi > N.shape[0]:
        raise ConfigError(f"classification needs windows [{lo}, {hi}) but the kernel has {N.shape[0]}")
    K = N[lo:hi, lo:hi]
    ds = StagedDataset(K, stage_labels(cfg.classify_windows, cfg.stages), cfg.stages)
    res = cross_validate(ds, cfg.k, cfg.folds, cfg.repeats, cfg.seed)
    with open(st.target("classification.csv"), "w", encoding="utf-8", newline="") as fh:
        w = files._writer(fh)
        w.writerow(["repeat", "fold", "accuracy"])
        for r, f, acc in res.fold_rows:
            w.writerow([r, f, files.fmt(acc)])
    summary = res.summary()
    st.target("classification_summary.txt").write_text(
        f"{summary}\n# classifier: RKHS {cfg.k}-nearest-neighbours on the normalized kernel\n",
        encoding="utf-8")
    print(summary)


def run_report(st):
    t, H, S, _, _ = files.read_entropy(st.need("entropy.csv"))
    ds = st.need("stress.txt").read_text(encoding="utf-8").strip()
    summary = st.need("classification_summary.txt").read_text(encoding="utf-8").strip()
    lines = ["# entropy trace", "t,H_S,|S1|"]
    lines += [f"{int(a)},{files.fmt(b)},{int(c)}" for a, b, c in zip(t, H, S)]
    lines += ["", "# distance stress", ds, "", "# classification (mean±stderr)", summary]
    text = "\n".join(lines) + "\n"
    st.target("report.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)


RUNNERS = {
    "ingest": run_ingest, "synth": run_synth, "networks": run_networks,
    "commute": run_commute, "entropy": run_entropy, "kernel": run_kernel,
    "embed": run_embed, "stress": run_stress, "classify": run_classify,
    "report": run_report,
}


def run_subcommand(name: str, cfg: PipelineConfig, strict: bool = False) -> int:
    """Run one stage; returns the process exit status."""
    try:
        cfg.validate()
        st = Stage(name, cfg, strict)
        RUNNERS[name](st)
        st.finish()
    except PrerequisiteError as exc:
        log.error("%s", exc)
        return EXIT_PREREQ
    except (SingularityError, DegenerateStateError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except (ValueError, EDTWKError) as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="edtwk", description=__doc__.splitlines()[0])
    p.add_argument("stage", choices=STAGES)
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--strict", action="store_true",
                   help="treat replicator non-convergence as a numerical failure (exit 4)")
    p.add_argument("-v", "--verbose", action="store_true")
    for f in fields(PipelineConfig):
        p.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, default=None,
                       metavar=f.type.upper())
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="edtwk: %(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config)
        for f in fields(PipelineConfig):
            raw = getattr(args, f.name)
            if raw is not None:
                cfg.set(f.name, raw)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    return run_subcommand(args.stage, cfg, args.strict)


if __name__ == "__main__":
    sys.exit(main())
