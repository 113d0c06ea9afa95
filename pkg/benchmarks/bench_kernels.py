"""Compare the compiled kernels with the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--size 4096]

Kernel timings run both modules in-process.  The end-to-end solve is run
in a subprocess per backend (``BIASTOL_BACKEND`` is read at import).
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from biastol import _kernels_py

try:
    from biastol import _kernels
except ImportError:  # pragma: no cover - depends on the build
    _kernels = None

SOLVE = """
import json, statistics, time
from biastol._backend import BACKEND
from biastol.distributions import GenGammaSpec
from biastol.quantile_map import analytic_map
from biastol.tolerance_classic import ToleranceSpec
from biastol.tolerance_fft import sample_size_fft
qmap = analytic_map(GenGammaSpec(1.0, 2.0), 1.0)
times = []
for r in (1, 3, 5, 10):
    for m in (1, 2, 7, 12):
        t0 = time.perf_counter()
        sample_size_fft(ToleranceSpec(r, m, 0.80, 0.05), qmap)
        times.append(time.perf_counter() - t0)
print(json.dumps({"backend": BACKEND, "median_s": statistics.median(times)}))
"""


def kernel_cases(size: int, rng: np.random.Generator) -> dict:
    x_beta = rng.uniform(0.0, 0.05, size)
    x_gamma = rng.uniform(0.0, 20.0, size)
    return {
        "betainc_array(a=1, b=400)": lambda k: k.betainc_array(x_beta, 1.0, 400.0),
        "betainc_array(a=10, b=1000)": lambda k: k.betainc_array(x_beta, 10.0, 1000.0),
        "gammainc_array(a=2.5)": lambda k: k.gammainc_array(2.5, x_gamma),
        "betainc scalar x1000": lambda k: [k.betainc(float(v), 3.0, 40.0) for v in x_beta[:1000]],
    }


def time_call(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def solve_timing(backend: str) -> dict:
    env = dict(os.environ, BIASTOL_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", SOLVE], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--size", type=int, default=4096)
    args = parser.parse_args()
    cases = kernel_cases(args.size, np.random.default_rng(0))

    print(f"{'kernel':32s} {'cython ms':>10s} {'python ms':>10s} {'speedup':>8s}")
    for name, fn in cases.items():
        t_py = time_call(lambda: fn(_kernels_py), args.repeat) * 1e3
        if _kernels is None:
            print(f"{name:32s} {'n/a':>10s} {t_py:10.3f} {'n/a':>8s}")
            continue
        t_cy = time_call(lambda: fn(_kernels), args.repeat) * 1e3
        print(f"{name:32s} {t_cy:10.3f} {t_py:10.3f} {t_py / t_cy:7.1f}x")

    print()
    print("FFT sample-size solve, Exp(2) length-bias map, 16-cell design grid")
    for backend in ("cython", "python"):
        try:
            res = solve_timing(backend)
        except subprocess.CalledProcessError:
            print(f"  {backend:7s} unavailable")
            continue
        print(f"  {res['backend']:7s} median {res['median_s'] * 1e3:8.2f} ms per solve")


if __name__ == "__main__":
    main()
