"""Conservative two-sided design from two one-sided problems.

Each one-sided problem is solved at confidence ``sqrt(1 - alpha)``; under
approximate independence of the two order statistics the product of the
confidences is ``1 - alpha``, so the coverage ``q_m - (1 - q_r)`` is a
lower bound that typically overshoots the needed sample size.
"""
from __future__ import annotations

import math

from biastol._search import DEFAULT_CAP, smallest_n
from biastol.errors import InfeasibleError
from biastol.order_stats import one_sided_lower, one_sided_upper
from biastol.quantile_map import QuantileMap
from biastol.tolerance_classic import Method, SampleSizeResult, ToleranceSpec, scheffe_tukey_sample_size


def split_alpha(alpha: float) -> float:
    """Per-side risk giving joint confidence 1 - alpha: ``1 - sqrt(1 - alpha)``."""
    return 1.0 - math.sqrt(1.0 - alpha)


def coverage_inequality(n: float, r: int, m: int, alpha: float, qmap: QuantileMap) -> float:
    """Two-sided coverage ``q_m - (1 - q_r)``; may be negative for small n."""
    if not n > r + m:
        raise InfeasibleError(f"need n > r + m = {r + m}, got n={n}")
    a = split_alpha(alpha)
    q_r = one_sided_lower(n, r, a, qmap)
    q_m = one_sided_upper(n, m, a, qmap)
    return q_m - (1.0 - q_r)


def sample_size_inequality(spec: ToleranceSpec, qmap: QuantileMap, n_cap: int = DEFAULT_CAP) -> SampleSizeResult:
    """Smallest n whose inequality coverage reaches ``spec.q``."""

    def ok(n: int) -> bool:
        try:
            return coverage_inequality(n, spec.r, spec.m, spec.alpha, qmap) >= spec.q
        except InfeasibleError:
            return False

    guess = scheffe_tukey_sample_size(spec).n
    n, calls = smallest_n(ok, n_min=spec.k + 1, n_start=guess, n_cap=n_cap)
    achieved = coverage_inequality(n, spec.r, spec.m, spec.alpha, qmap)
    return SampleSizeResult(n, Method.INEQUALITY, achieved, {"evaluations": calls})
