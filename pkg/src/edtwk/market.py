"""Price tables, synthetic markets and sliding-window correlation networks."""
from __future__ import annotations

import csv
import datetime as dt
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import ConfigError, ParseError, ShapeError, ValidationError

DEFAULT_WIDTH = 28


@dataclass(frozen=True)
class PriceTable:
    dates: tuple
    tickers: tuple
    prices: np.ndarray  # (n_days, n_assets), date-major

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "tickers", tuple(self.tickers))
        if prices.ndim != 2 or prices.shape != (len(self.dates), len(self.tickers)):
            raise ShapeError(
                f"prices shape {prices.shape} does not match "
                f"{len(self.dates)} dates x {len(self.tickers)} tickers")
        if len(self.tickers) < 2 or len(self.dates) < 2:
            raise ShapeError("need at least 2 tickers and 2 dates")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            raise ValidationError("all prices must be finite and > 0")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValidationError("dates must be strictly increasing")

    @property
    def n_days(self) -> int:
        return self.prices.shape[0]

    @property
    def n_assets(self) -> int:
        return self.prices.shape[1]


@dataclass(frozen=True)
class NetworkSnapshot:
    t: int
    adjacency: np.ndarray


@dataclass(frozen=True)
class Regime:
    """Days ``[start, end)`` during which a shared factor drives the market.

    ``breadth`` is the fraction of assets (the first ``round(breadth * n)``
    tickers) exposed to the factor; the rest keep purely idiosyncratic noise.
    """
    start: int
    end: int
    loading: float
    breadth: float = 1.0


@dataclass(frozen=True)
class SynthConfig:
    n_assets: int = 20
    n_days: int = 400
    regimes: tuple = field(default_factory=tuple)
    noise_scale: float = 0.02
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "regimes", tuple(
            r if isinstance(r, Regime) else Regime(*r) for r in self.regimes))
        if self.n_assets < 2 or self.n_days < 2:
            raise ConfigError("n_assets and n_days must both be >= 2")
        if not self.noise_scale > 0:
            raise ConfigError("noise_scale must be > 0")
        spans = sorted((r.start, r.end) for r in self.regimes)
        for r in self.regimes:
            if not (0 <= r.start < r.end <= self.n_days):
                raise ConfigError(f"regime [{r.start}, {r.end}) outside [0, {self.n_days})")
            if not (0.0 <= r.loading <= 1.0):
                raise ConfigError(f"regime loading {r.loading} outside [0, 1]")
            if not (0.0 < r.breadth <= 1.0):
                raise ConfigError(f"regime breadth {r.breadth} outside (0, 1]")
        for (s0, e0), (s1, e1) in zip(spans, spans[1:]):
            if s1 < e0:
                raise ConfigError(f"regimes [{s0}, {e0}) and [{s1}, {e1}) overlap")


def parse_regimes(text: str) -> tuple:
    """Parse ``start:end:loading[:breadth]`` items separated by ``;`` or ``,``."""
    out = []
    for item in text.replace(",", ";").split(";"):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) not in (3, 4):
            raise ConfigError(f"bad regime {item!r}; expected start:end:loading[:breadth]")
        try:
            out.append(Regime(int(parts[0]), int(parts[1]), *map(float, parts[2:])))
        except ValueError as exc:
            raise ConfigError(f"bad regime {item!r}: {exc}") from None
    return tuple(out)


def format_regimes(regimes: Iterable[Regime]) -> str:
    return ";".join(f"{r.start}:{r.end}:{r.loading:g}:{r.breadth:g}" for r in regimes)


# ---------------------------------------------------------------------------
# CSV I/O

def _parse_date(text, line):
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise ParseError(f"bad ISO-8601 date {text!r}", line) from None


def parse_prices(source: TextIO | str, missing: str = "reject") -> PriceTable:
    """Read the ``date,<ticker>...`` price CSV.

    ``missing`` is ``"reject"`` (empty cells are an error) or
    ``"forward-fill"`` (carry the previous day's price; a gap on the first
    row is still an error).
    """
    if missing not in ("reject", "forward-fill"):
        raise ConfigError(f"unknown missing-data policy {missing!r}")
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ShapeError("empty price file") from None
    header = [h.strip() for h in header]
    if not header or header[0].lower() != "date":
        raise ParseError("first column must be 'date'", 1)
    tickers = header[1:]
    if len(tickers) < 2:
        raise ShapeError("need at least 2 tickers")
    if len(set(tickers)) != len(tickers):
        raise ParseError("duplicate ticker names in header", 1)

    dates, rows = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(row)}", lineno)
        dates.append(_parse_date(row[0], lineno))
        values = []
        for cell in row[1:]:
            cell = cell.strip()
            if cell == "":
                if missing == "reject":
                    raise ParseError("missing price", lineno)
                values.append(math.nan)
                continue
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"non-numeric price {cell!r}", lineno) from None
            if not math.isfinite(v) or v <= 0:
                raise ValidationError(f"line {lineno}: price must be finite and > 0, got {cell!r}")
            values.append(v)
        rows.append(values)

    if len(rows) < 2:
        raise ShapeError("need at least 2 dates")
    prices = np.array(rows, dtype=float)
    if missing == "forward-fill":
        for r in range(prices.shape[0]):
            gaps = np.isnan(prices[r])
            if gaps.any():
                if r == 0:
                    raise ParseError("missing price on first data row cannot be forward-filled", 2)
                prices[r, gaps] = prices[r - 1, gaps]
    return PriceTable(dates, tickers, prices)


def write_prices(table: PriceTable, out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["date", *table.tickers])
    for d, row in zip(table.dates, table.prices):
        w.writerow([d.isoformat(), *(format(v, ".12g") for v in row)])


# ---------------------------------------------------------------------------
# correlation networks

def pearson_abs(x: Sequence[float], y: Sequence[float]) -> float:
    """Absolute sample Pearson correlation; 0 when either series is constant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ShapeError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise ShapeError("need at least 2 observations")
    xc = x - x.mean()
    yc = y - y.mean()
    den = math.sqrt(float(xc @ xc)) * math.sqrt(float(yc @ yc))
    if den == 0.0:
        return 0.0
    return min(1.0, abs(float(xc @ yc)) / den)


def abs_correlation_matrix(window: np.ndarray) -> np.ndarray:
    """|Pearson| between the columns of ``window``; zero diagonal.

    Constant columns get zero weight to every other column.
    """
    xc = window - window.mean(axis=0)
    ss = np.einsum("ij,ij->j", xc, xc)
    norm = np.sqrt(ss)
    ok = ss > 0
    A = np.zeros((window.shape[1], window.shape[1]))
    sub = xc[:, ok]
    A[np.ix_(ok, ok)] = np.abs(sub.T @ sub) / np.outer(norm[ok], norm[ok])
    A = np.minimum(A, 1.0)
    A = 0.5 * (A + A.T)
    np.fill_diagonal(A, 0.0)
    return A


def build_network_sequence(prices: PriceTable | np.ndarray,
                           width: int = DEFAULT_WIDTH) -> list[NetworkSnapshot]:
    """One |Pearson| network per day ``t`` using days ``t-width+1 .. t``."""
    P = prices.prices if isinstance(prices, PriceTable) else np.asarray(prices, dtype=float)
    if width < 2:
        raise ShapeError("window width must be >= 2")
    n_days = P.shape[0]
    if width > n_days:
        raise ShapeError(f"window width {width} exceeds {n_days} days")
    return [NetworkSnapshot(t, abs_correlation_matrix(P[t - width + 1:t + 1]))
            for t in range(width - 1, n_days)]


# ---------------------------------------------------------------------------
# synthetic data

def synth_market(cfg: SynthConfig) -> PriceTable:
    """One-factor synthetic market.

    Each asset's log-price is a fixed base level plus a daily shock
    ``noise_scale * (l * f_t + sqrt(1 - l**2) * z_it)`` where ``f`` is the
    shared factor and ``l`` the loading of the regime active on that day
    (0 outside regimes, and for assets outside the regime's breadth).
    """
    rng = np.random.default_rng(cfg.seed)
    n, T = cfg.n_assets, cfg.n_days
    base = rng.uniform(math.log(10.0), math.log(100.0), size=n)
    factor = rng.standard_normal(T)
    idio = rng.standard_normal((T, n))
    load = np.zeros((T, n))
    for r in cfg.regimes:
        k = max(1, int(round(r.breadth * n)))
        load[r.start:r.end, :k] = r.loading
    logp = base + cfg.noise_scale * (load * factor[:, None] + np.sqrt(1.0 - load ** 2) * idio)
    start = dt.date(2000, 1, 3)
    dates = [start + dt.timedelta(days=i) for i in range(T)]
    width = max(3, len(str(n - 1)))
    tickers = [f"S{i:0{width}d}" for i in range(n)]
    return PriceTable(dates, tickers, np.exp(logp))
