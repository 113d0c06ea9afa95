"""Special functions and the parametric families used by the solvers.

Beta and Chi-square laws drive the order-statistic calculations; the
Generalized Gamma family (which contains Gamma and Exponential) is the
parametric target model, and it is closed under size-biased sampling:
weighting the density ``f(x; alpha, beta, delta)`` by ``x**kappa`` gives
``f(x; alpha + kappa, beta, delta)``.

Random draws use numpy's counter-based ``Philox`` bit generator, always
explicitly seeded (see :func:`make_rng`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from biastol._backend import betainc, betainc_array, gammainc, gammainc_array
from biastol.errors import ConvergenceError, DomainError, UnboundedQuantileError

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Return a Philox-backed generator for an integer seed or seed sequence.

    A ``Generator`` passed in is returned unchanged so callers can thread
    one stream through several draws.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    if seed is None or isinstance(seed, bool):
        raise TypeError("an explicit integer seed is required")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


@dataclass(frozen=True)
class BetaParams:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"Beta parameters must be positive, got a={self.a}, b={self.b}")

    def cdf(self, x):
        return pbeta(x, self.a, self.b)

    def ppf(self, prob: float) -> float:
        return qbeta(prob, self.a, self.b)


@dataclass(frozen=True)
class GenGammaSpec:
    """Generalized Gamma law with density

    ``delta * beta**alpha / Gamma(alpha/delta) * x**(alpha-1) * exp(-(beta*x)**delta)``.

    ``rate_beta`` is a rate (inverse time units).  ``shape_delta = 1`` gives
    the ordinary Gamma(shape, rate) law.
    """

    shape_alpha: float
    rate_beta: float
    shape_delta: float = 1.0

    def __post_init__(self):
        for name in ("shape_alpha", "rate_beta", "shape_delta"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a positive finite number, got {v!r}")

    def moment(self, power: float) -> float:
        """E[X**power], finite for power > -alpha."""
        a, b, d = self.shape_alpha, self.rate_beta, self.shape_delta
        if power <= -a:
            return math.inf
        return math.exp(math.lgamma((a + power) / d) - math.lgamma(a / d)) / b**power

    @property
    def mean(self) -> float:
        return self.moment(1.0)

    @property
    def sd(self) -> float:
        return math.sqrt(max(self.moment(2.0) - self.mean**2, 0.0))

    def cdf(self, x):
        return gengamma_cdf(x, self)

    def pdf(self, x):
        return gengamma_pdf(x, self)

    def ppf(self, prob):
        return gengamma_quantile(prob, self)


def _check_beta(a: float, b: float) -> None:
    if not (a > 0 and b > 0):
        raise DomainError(f"Beta parameters must be positive, got a={a}, b={b}")


def pbeta(x, a: float, b: float):
    """Regularized incomplete beta function I_x(a, b) (the Beta(a, b) CDF).

    Accepts a scalar or an array of ``x`` in [0, 1].
    """
    _check_beta(a, b)
    if np.ndim(x) == 0:
        xf = float(x)
        if not 0.0 <= xf <= 1.0:
            raise DomainError(f"pbeta: x={xf} outside [0, 1]")
        return betainc(xf, a, b)
    xs = np.asarray(x, dtype=np.float64)
    if np.any((xs < 0.0) | (xs > 1.0)) or np.any(np.isnan(xs)):
        raise DomainError("pbeta: x outside [0, 1]")
    return betainc_array(xs, a, b)


def dbeta(x: float, a: float, b: float) -> float:
    if x <= 0.0 or x >= 1.0:
        if (x <= 0.0 and a < 1) or (x >= 1.0 and b < 1):
            return math.inf
        if (x <= 0.0 and a == 1) or (x >= 1.0 and b == 1):
            return math.exp(-_lbeta(a, b))
        return 0.0
    return math.exp((a - 1) * math.log(x) + (b - 1) * math.log1p(-x) - _lbeta(a, b))


def _lbeta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def newton_bisect(
    f: Callable[[float], float],
    fprime: Callable[[float], float],
    lo: float,
    hi: float,
    x0: float,
    xtol: float = 1e-15,
    ftol: float = 1e-15,
    maxiter: int = 500,
) -> float:
    """Root of an increasing function on [lo, hi] by safeguarded Newton.

    ``f(lo) <= 0 <= f(hi)`` is assumed.  A Newton step leaving the current
    bracket (or a non-positive derivative) falls back to bisection.
    """
    x = min(max(x0, lo), hi)
    for _ in range(maxiter):
        fx = f(x)
        if abs(fx) <= ftol:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        if hi - lo <= xtol * max(1e-300, abs(x)) or hi - lo <= 1e-300:
            return 0.5 * (lo + hi)
        d = fprime(x)
        step_ok = d > 0 and math.isfinite(d)
        if step_ok:
            xn = x - fx / d
            step_ok = lo < xn < hi
        if step_ok and abs(xn - x) <= xtol * abs(x):
            return xn
        x = xn if step_ok else 0.5 * (lo + hi)
    raise ConvergenceError("newton_bisect did not converge")


def qbeta(prob: float, a: float, b: float) -> float:
    """Inverse of :func:`pbeta` in its first argument."""
    _check_beta(a, b)
    prob = float(prob)
    if not 0.0 <= prob <= 1.0:
        raise DomainError(f"qbeta: prob={prob} outside [0, 1]")
    if prob == 0.0:
        return 0.0
    if prob == 1.0:
        return 1.0
    lb = _lbeta(a, b)
    # small-tail starting values from the leading term of the series
    lower_guess = math.exp((math.log(prob) + math.log(a) + lb) / a)
    upper_guess = 1.0 - math.exp((math.log1p(-prob) + math.log(b) + lb) / b)
    mean = a / (a + b)
    if lower_guess < mean * 0.5:
        x0 = lower_guess
    elif upper_guess > 0.5 * (1.0 + mean):
        x0 = upper_guess
    else:
        x0 = mean
    return newton_bisect(
        lambda x: betainc(x, a, b) - prob,
        lambda x: dbeta(x, a, b),
        0.0,
        1.0,
        x0,
        xtol=4e-16,
        ftol=0.0,
    )


def qgamma(prob: float, shape: float) -> float:
    """Quantile of Gamma(shape, rate=1)."""
    if not shape > 0:
        raise DomainError("gamma shape must be positive")
    if not 0.0 <= prob < 1.0:
        if prob == 1.0:
            raise UnboundedQuantileError("gamma quantile at probability 1 is unbounded")
        raise DomainError(f"prob={prob} outside [0, 1)")
    if prob == 0.0:
        return 0.0
    lga = math.lgamma(shape)
    hi = shape + 40.0 * math.sqrt(shape)
    while gammainc(shape, hi) < prob:
        hi *= 2.0
    small = math.exp((math.log(prob) + math.log(shape) + lga) / shape)
    x0 = small if small < shape else shape

    def dens(x: float) -> float:
        if x <= 0:
            return 0.0
        return math.exp((shape - 1) * math.log(x) - x - lga)

    return newton_bisect(lambda x: gammainc(shape, x) - prob, dens, 0.0, hi, x0, xtol=4e-16, ftol=0.0)


def chisq_quantile(prob: float, df: int) -> float:
    """The ``prob`` quantile of a Chi-square law with ``df`` degrees of freedom."""
    if not 0.0 < prob < 1.0:
        raise DomainError(f"chisq_quantile: prob={prob} must lie in (0, 1)")
    if not df > 0:
        raise DomainError(f"chisq_quantile: df={df} must be positive")
    if df == 2:
        return -2.0 * math.log1p(-prob)
    return 2.0 * qgamma(prob, df / 2.0)


def gengamma_cdf(x, spec: GenGammaSpec):
    """CDF of the Generalized Gamma law; scalar or array ``x >= 0``."""
    a = spec.shape_alpha / spec.shape_delta
    if np.ndim(x) == 0:
        xf = float(x)
        if xf < 0 or math.isnan(xf):
            raise DomainError(f"gengamma_cdf: x={xf} must be nonnegative")
        if math.isinf(xf):
            return 1.0
        return gammainc(a, (spec.rate_beta * xf) ** spec.shape_delta)
    xs = np.asarray(x, dtype=np.float64)
    if np.any(xs < 0) or np.any(np.isnan(xs)):
        raise DomainError("gengamma_cdf: x must be nonnegative")
    with np.errstate(over="ignore"):
        t = (spec.rate_beta * xs) ** spec.shape_delta
    out = gammainc_array(a, np.where(np.isinf(t), 0.0, t))
    return np.where(np.isinf(t), 1.0, out)


def gengamma_pdf(x, spec: GenGammaSpec):
    a, b, d = spec.shape_alpha, spec.rate_beta, spec.shape_delta
    xs = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        logf = (
            math.log(d)
            + a * math.log(b)
            - math.lgamma(a / d)
            + (a - 1) * np.log(xs)
            - (b * xs) ** d
        )
        out = np.where(xs > 0, np.exp(logf), 0.0)
    return float(out) if np.ndim(x) == 0 else out


def gengamma_quantile(prob, spec: GenGammaSpec):
    """Inverse of :func:`gengamma_cdf`.

    Raises :class:`UnboundedQuantileError` at ``prob == 1``.  Vectorised over
    array input via the Gamma quantile of ``(beta*X)**delta``.
    """
    a = spec.shape_alpha / spec.shape_delta

    def one(p: float) -> float:
        t = qgamma(p, a)
        return t ** (1.0 / spec.shape_delta) / spec.rate_beta

    if np.ndim(prob) == 0:
        return one(float(prob))
    ps = np.asarray(prob, dtype=np.float64)
    if np.any(ps == 1.0):
        raise UnboundedQuantileError("gengamma_quantile at probability 1 is unbounded")
    if np.any((ps < 0) | (ps > 1)) or np.any(np.isnan(ps)):
        raise DomainError("gengamma_quantile: prob outside [0, 1)")
    return np.array([one(p) for p in ps.ravel()]).reshape(ps.shape)


def size_bias(spec: GenGammaSpec, kappa: float) -> GenGammaSpec:
    """Law of the size-biased density ``x**kappa f(x) / E[X**kappa]``."""
    if not kappa > 0:
        raise DomainError(f"size-bias degree kappa must be positive, got {kappa}")
    return GenGammaSpec(spec.shape_alpha + kappa, spec.rate_beta, spec.shape_delta)


def sample(spec: GenGammaSpec, count: int, seed: SeedLike) -> np.ndarray:
    """Draw ``count`` variates, using ``(beta*X)**delta ~ Gamma(alpha/delta, 1)``."""
    if count < 1:
        raise DomainError("count must be at least 1")
    rng = make_rng(seed)
    g = rng.standard_gamma(spec.shape_alpha / spec.shape_delta, size=int(count))
    if spec.shape_delta != 1.0:
        g = g ** (1.0 / spec.shape_delta)
    return g / spec.rate_beta


def sample_size_biased(spec: GenGammaSpec, kappa: float, count: int, seed: SeedLike,
                       tail: float = 1e-12) -> np.ndarray:
    """Accept-reject draws from ``x**kappa f(x)``, proposing from ``f`` itself.

    A proposal ``x`` is kept with probability ``min(1, (x / c)**kappa)``
    where ``c`` is the ``1 - tail`` quantile of the size-biased law; the
    result differs from the exact law only above ``c``, a set of
    probability ``tail``.  Works for any ``f`` one can sample, so it
    checks :func:`size_bias` independently.
    """
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    if count < 1:
        raise DomainError("count must be at least 1")
    rng = make_rng(seed)
    cap = float(gengamma_quantile(1.0 - tail, size_bias(spec, kappa)))
    accept_rate = spec.moment(kappa) / cap**kappa
    out: list[np.ndarray] = []
    have = 0
    while have < count:
        batch = int(min(5e6, max(1000, 1.2 * (count - have) / accept_rate)))
        x = sample(spec, batch, rng)
        keep = x[rng.random(batch) < np.minimum(1.0, (x / cap) ** kappa)]
        out.append(keep)
        have += keep.size
    return np.concatenate(out)[:count]
