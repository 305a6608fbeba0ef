"""Seeded synthetic markets used by the tests, the CLI defaults and the benchmark."""
from .market import Regime, SynthConfig, synth_market


def crisis_market(seed: int, n_assets: int = 30, n_days: int = 600,
                  start: int = 300, end: int = 360, loading: float = 0.95,
                  breadth: float = 0.3):
    """Calm market with one high-correlation episode hitting a core of assets."""
    return synth_market(SynthConfig(n_assets, n_days, (Regime(start, end, loading, breadth),),
                                    seed=seed))


def two_regime_market(seed: int, n_assets: int = 20, n_days: int = 200,
                      switch: int = 105, loading: float = 0.95, breadth: float = 0.3):
    """Calm first part, correlated core from ``switch`` to the end."""
    return synth_market(SynthConfig(n_assets, n_days,
                                    (Regime(switch, n_days, loading, breadth),), seed=seed))


def smooth_market(seed: int, n_assets: int = 20, n_days: int = 260, step: int = 20,
                  breadth: float = 0.3):
    """Loading that climbs and falls in short steps, giving a slowly drifting market."""
    levels = [0.0, 0.3, 0.5, 0.7, 0.85, 0.95, 0.85, 0.7, 0.5, 0.3, 0.0]
    regimes = []
    for i, lv in enumerate(levels):
        s, e = i * step, min((i + 1) * step, n_days)
        if s >= n_days:
            break
        if lv > 0:
            regimes.append(Regime(s, e, lv, breadth))
    return synth_market(SynthConfig(n_assets, n_days, tuple(regimes), seed=seed))
