"""Distribution-free tolerance limits for unbiased samples.

For an iid sample, the population proportion between the r-th smallest
and the m-th largest order statistic is Beta(n + 1 - k, k) with
``k = r + m``, whatever the parent law.  This gives the exact design
equation ``pbeta(1 - q; k, n + 1 - k) = 1 - alpha`` and the Scheffé-Tukey
closed form built on the Chi-square quantile at 2k degrees of freedom.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from biastol._search import smallest_n
from biastol.distributions import chisq_quantile, pbeta, qbeta
from biastol.errors import DomainError, InfeasibleError


class Method(str, Enum):
    EXACT_BETA = "exact"
    SCHEFFE_TUKEY = "scheffe"
    INEQUALITY = "ineq"
    FFT = "fft"


@dataclass(frozen=True)
class ToleranceSpec:
    """Design tuple: order-statistic indices, coverage proportion, risk."""

    r: int
    m: int
    q: float
    alpha: float

    def __post_init__(self):
        if int(self.r) != self.r or int(self.m) != self.m or self.r < 1 or self.m < 1:
            raise DomainError(f"r and m must be positive integers, got r={self.r}, m={self.m}")
        if not 0.0 < self.q < 1.0:
            raise DomainError(f"q must lie in (0, 1), got {self.q}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def k(self) -> int:
        return self.r + self.m


@dataclass
class SampleSizeResult:
    n: int
    method: Method
    achieved: float
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"n": self.n, "method": self.method.value, "achieved": self.achieved,
                "diagnostics": self.diagnostics}


def _chisq_term(alpha: float, k: int) -> float:
    return chisq_quantile(1.0 - alpha, 2 * k)


def exact_sample_size(spec: ToleranceSpec) -> SampleSizeResult:
    """Smallest n with ``pbeta(1 - q; k, n + 1 - k) >= 1 - alpha``."""
    k = spec.k
    target = 1.0 - spec.alpha

    def ok(n: int) -> bool:
        return pbeta(1.0 - spec.q, k, n + 1 - k) >= target

    n, calls = smallest_n(ok, n_min=k)
    achieved = pbeta(1.0 - spec.q, k, n + 1 - k)
    return SampleSizeResult(n, Method.EXACT_BETA, achieved, {"evaluations": calls})


def scheffe_tukey_sample_size(spec: ToleranceSpec) -> SampleSizeResult:
    """Ceiling of ``x/4 (1 + q)/(1 - q) + (k - 1)/2``, x the chi-square(2k) quantile."""
    x = _chisq_term(spec.alpha, spec.k)
    raw = 0.25 * x * (1.0 + spec.q) / (1.0 - spec.q) + 0.5 * (spec.k - 1)
    n = max(math.ceil(raw - 1e-12), spec.k)
    achieved = pbeta(1.0 - spec.q, spec.k, n + 1 - spec.k)
    return SampleSizeResult(n, Method.SCHEFFE_TUKEY, achieved, {"raw": raw, "chisq": x})


def exact_coverage(n: int, r: int, m: int, alpha: float) -> float:
    """Proportion q covered with confidence 1 - alpha: ``1 - qbeta(1 - alpha; k, n + 1 - k)``."""
    k = r + m
    if n < k:
        raise InfeasibleError(f"n={n} is smaller than r + m = {k}")
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    return 1.0 - qbeta(1.0 - alpha, k, n + 1 - k)


def scheffe_tukey_coverage(n: float, r: int, m: int, alpha: float) -> float:
    """Closed-form coverage ``(n - (k-1)/2 - x/4) / (n - (k-1)/2 + x/4)``.

    Raises :class:`InfeasibleError` when the value is negative; the
    numerator-zero boundary returns 0.
    """
    k = r + m
    if n < k:
        raise InfeasibleError(f"n={n} is smaller than r + m = {k}")
    x = _chisq_term(alpha, k)
    centre = n - 0.5 * (k - 1)
    q = (centre - 0.25 * x) / (centre + 0.25 * x)
    if q < 0.0:
        raise InfeasibleError(f"Scheffé-Tukey coverage is negative ({q:.4g}) at n={n}")
    return q
