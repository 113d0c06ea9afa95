"""Two-sided coverage and sample size from the FFT difference law.

The coverage at sample size n is the alpha-quantile of the approximate law
of ``F(Y_{n+1-m}) - F(Y_r)``; the sample size is the smallest integer n
whose coverage reaches q, found by bracketing and integer bisection.
"""
from __future__ import annotations

import time

from biastol._search import DEFAULT_CAP, smallest_n
from biastol.fft_conv import FFTConfig, difference_law
from biastol.quantile_map import QuantileMap
from biastol.tolerance_classic import Method, SampleSizeResult, ToleranceSpec, scheffe_tukey_sample_size


def coverage_fft(n: int, r: int, m: int, alpha: float, qmap: QuantileMap,
                 config: FFTConfig | None = None) -> float:
    """alpha-quantile of the difference law.

    The raw value lies in [-1, 1]; a nonpositive result means the design
    is infeasible at this n.
    """
    return difference_law(n, r, m, qmap, config).quantile(alpha)


def sample_size_fft(spec: ToleranceSpec, qmap: QuantileMap, config: FFTConfig | None = None,
                    n_cap: int = DEFAULT_CAP) -> SampleSizeResult:
    config = config or FFTConfig()
    t0 = time.perf_counter()
    cache: dict[int, float] = {}

    def cov(n: int) -> float:
        if n not in cache:
            cache[n] = coverage_fft(n, spec.r, spec.m, spec.alpha, qmap, config)
        return cache[n]

    guess = scheffe_tukey_sample_size(spec).n
    n, calls = smallest_n(lambda n: cov(n) >= spec.q, n_min=spec.k + 1, n_start=guess, n_cap=n_cap)
    law = difference_law(n, spec.r, spec.m, qmap, config)
    diag = {
        "evaluations": calls,
        "wall_time_s": time.perf_counter() - t0,
        "fft_size": law.info["fft_size"],
        "step": law.info["step"],
        "truncated_mass": law.info["truncated_mass"],
    }
    return SampleSizeResult(n, Method.FFT, cov(n), diag)
