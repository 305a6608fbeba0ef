"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each path runs in its own interpreter because the switch is read at import.
"""
import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, statistics, sys, time
import numpy as np
from edtwk import _accel
from edtwk.dominant import dominant_distribution
from edtwk.gak import gak, kernel_matrix
from edtwk.dominant import EntropySeries

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
P, Q = rng.random((28, 20)), rng.random((28, 20))
series = [EntropySeries(i, rng.random((28, 20)) * 0.1) for i in range(40)]
W = np.triu(rng.random((60, 60)), 1); W = W + W.T

cases = {
    "gak pair 28x20": lambda: gak(P, Q),
    "gram 40 series": lambda: kernel_matrix(series),
    "replicator 60 vertices": lambda: dominant_distribution(W),
}
out = {"numba": _accel.USE_NUMBA}
for name, fn in cases.items():
    fn()  # warm-up, includes any jit compile
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter(); fn(); ts.append(time.perf_counter() - t0)
    out[name] = statistics.median(ts)
print(json.dumps(out))
"""


def run(disable, repeat):
    env = dict(os.environ, EDTWK_DISABLE_NUMBA="1" if disable else "0")
    r = subprocess.run([sys.executable, "-c", CHILD, str(repeat)], env=env,
                       capture_output=True, text=True, check=True)
    return json.loads(r.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    fast, slow = run(False, args.repeat), run(True, args.repeat)
    print(f"{'case':<26}{'numba s':>12}{'numpy s':>12}{'speedup':>10}")
    for name in fast:
        if name == "numba":
            continue
        print(f"{name:<26}{fast[name]:>12.5f}{slow[name]:>12.5f}{slow[name] / fast[name]:>9.1f}x")
    if not fast["numba"]:
        print("numba unavailable: both columns use the numpy path")


if __name__ == "__main__":
    main()
