"""
Compiled versus plain-Python kernels.

Each mode runs in a fresh interpreter because GAARCH_DISABLE_NUMBA is read
at import time. Compilation happens in a warm-up call and is not timed.

    python3 benchmarks/bench_kernels.py [--n 20000] [--repeat 3]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from gaarch._jit import USE_NUMBA
from gaarch.model import GaarchParams, filter_returns, simulate
from gaarch.skewt import SkewTParams, raw_cdf, raw_logpdf, raw_quantile

n, repeat = int(sys.argv[1]), int(sys.argv[2])
p = GaarchParams.from_annualized(16.05, -7.80, 5.30, 0.26, 0.03, 0.70, 15.24, 16.95)
tails = SkewTParams(5.0, 20.0)
x = np.linspace(-8.0, 8.0, n)
u = np.linspace(1e-6, 1 - 1e-6, n)
series, _ = simulate(p, n, np.random.default_rng(0))

cases = {
    "raw_logpdf": lambda: raw_logpdf(x, tails),
    "raw_cdf": lambda: raw_cdf(x, tails),
    "raw_quantile": lambda: raw_quantile(u, tails),
    "filter": lambda: filter_returns(p, series),
    "simulate": lambda: simulate(p, n, np.random.default_rng(1)),
}
out = {"numba": USE_NUMBA}
for name, f in cases.items():
    f()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        f()
        best = min(best, time.perf_counter() - t0)
    out[name] = best
print(json.dumps(out))
"""


def run(disable: bool, n: int, repeat: int) -> dict:
    env = dict(os.environ, GAARCH_DISABLE_NUMBA="1" if disable else "0")
    res = subprocess.run(
        [sys.executable, "-c", WORKER, str(n), str(repeat)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    fast = run(False, args.n, args.repeat)
    slow = run(True, args.n, args.repeat)
    if not fast["numba"]:
        print("numba unavailable; both columns use the Python kernels")
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<14}{'numba ms':>12}{'python ms':>12}{'speedup':>10}")
    for name in fast:
        if name == "numba":
            continue
        a, b = 1e3 * fast[name], 1e3 * slow[name]
        print(f"{name:<14}{a:>12.2f}{b:>12.2f}{b / a:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
