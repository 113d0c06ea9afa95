"""Monte Carlo evaluation of tolerance designs under prevalent sampling.

Subjects are sampled cross-sectionally, so observed lifetimes are length
biased.  Onset is assumed to follow a stationary Poisson process, which
makes the backward time ``A = U * Y`` uniform given the lifetime ``Y``.
The forward time ``R = Y - A`` is right-censored by an independent
Exponential(lambda) time C; the observed value is ``A + min(R, C)``.

Empirical coverage is the fraction of replicated samples of size n whose
tolerance interval ``[Y_(r), Y_(n+1-m)]`` covers at least a proportion q
of the target law F.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from biastol.distributions import GenGammaSpec, SeedLike, gengamma_cdf, make_rng, sample, size_bias
from biastol.errors import BiastolError, ConvergenceError, DomainError
from biastol.fft_conv import FFTConfig
from biastol.quantile_map import DEFAULT_DRAWS, DEFAULT_KNOTS, QuantileMap, analytic_map, monte_carlo_map
from biastol.tolerance_classic import ToleranceSpec, scheffe_tukey_sample_size
from biastol.tolerance_fft import sample_size_fft
from biastol.tolerance_inequality import sample_size_inequality

log = logging.getLogger(__name__)

CSV_HEADER = ("target_shape", "target_rate", "censor_rate", "r", "m", "method", "n",
              "coverage", "stderr", "runtime_ms")
METHODS = ("scheffe", "ineq", "fft")
DEFAULT_TARGETS = ((2.0, 2.0), (1.0, 2.0), (0.5, 2.0))
DEFAULT_CENSOR_RATES = (0.0, 0.10, 0.25, 0.40)
DEFAULT_R = (1, 3, 5, 10)
DEFAULT_M = (1, 2, 7, 12)


class ObservedTime(NamedTuple):
    value: float
    event: bool


@dataclass(frozen=True)
class SimConfig:
    """A simulation grid: every (target, censor rate, r, m, method) cell."""

    targets: tuple[GenGammaSpec, ...] = tuple(GenGammaSpec(a, b) for a, b in DEFAULT_TARGETS)
    censor_rates: tuple[float, ...] = DEFAULT_CENSOR_RATES
    r_grid: tuple[int, ...] = DEFAULT_R
    m_grid: tuple[int, ...] = DEFAULT_M
    q: float = 0.80
    alpha: float = 0.05
    replications: int = 500
    seed: int | None = None
    methods: tuple[str, ...] = METHODS
    draws: int = DEFAULT_DRAWS
    knot_count: int = DEFAULT_KNOTS
    events_only: bool = False
    fft: FFTConfig = field(default_factory=FFTConfig)

    def __post_init__(self):
        if self.seed is None:
            raise DomainError("SimConfig requires an explicit seed")
        if self.replications < 100:
            raise DomainError("replications must be at least 100")
        for c in self.censor_rates:
            if not 0.0 <= c <= 0.9:
                raise DomainError(f"censor rate {c} outside [0, 0.9]")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise DomainError(f"unknown methods {sorted(bad)}")
        ToleranceSpec(1, 1, self.q, self.alpha)

    @classmethod
    def from_toml(cls, text: str, **overrides) -> "SimConfig":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        doc = tomllib.loads(text)
        kw: dict = {}
        if "targets" in doc:
            kw["targets"] = tuple(GenGammaSpec(*map(float, t)) for t in doc["targets"])
        for key in ("censor_rates", "r_grid", "m_grid", "methods"):
            if key in doc:
                kw[key] = tuple(doc[key])
        for key in ("q", "alpha", "replications", "seed", "draws", "knot_count", "events_only"):
            if key in doc:
                kw[key] = doc[key]
        if "fft" in doc:
            kw["fft"] = FFTConfig(**doc["fft"])
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)


def draw_length_biased(target: GenGammaSpec, count: int, seed: SeedLike) -> np.ndarray:
    """Exact length-biased draws: the size-biased law with degree 1."""
    if not math.isfinite(target.mean):
        raise DomainError("target must have a finite mean")
    return sample(size_bias(target, 1.0), count, seed)


def censor_forward(lifetimes, lam: float, seed: SeedLike) -> tuple[np.ndarray, np.ndarray]:
    """Split each lifetime at a uniform cross-section and censor the forward part.

    Returns ``(values, events)`` with ``values = A + min(R, C)`` and
    ``events = R <= C``.
    """
    if not lam > 0:
        raise DomainError("censoring rate lambda must be positive")
    y = np.asarray(lifetimes, dtype=float)
    rng = make_rng(seed)
    u = rng.random(y.shape)
    c = rng.standard_exponential(y.shape) / lam
    backward = u * y
    forward = y - backward
    events = forward <= c
    return backward + np.minimum(forward, c), events


def as_records(values: np.ndarray, events: np.ndarray) -> list[ObservedTime]:
    return [ObservedTime(float(v), bool(e)) for v, e in zip(values, events)]


def calibrate_lambda(target: GenGammaSpec, censor_rate: float, seed: SeedLike,
                     draws: int = 100_000, tol: float = 1e-6, max_steps: int = 200) -> float:
    """Exponential censoring rate giving the requested censored fraction.

    Common random numbers across bisection steps: forward times are drawn
    once and ``P(C < R) = E[1 - exp(-lambda R)]`` is averaged over them, a
    smooth monotone function of lambda, bisected on the log scale.
    """
    if not 0.0 < censor_rate < 1.0:
        raise DomainError("censor_rate must lie in (0, 1)")
    rng = make_rng(seed)
    y = draw_length_biased(target, draws, rng)
    forward = (1.0 - rng.random(draws)) * y

    def rate(lam: float) -> float:
        return float(-np.mean(np.expm1(-lam * forward)))

    lo, hi = -40.0, 40.0
    for _ in range(max_steps):
        mid = 0.5 * (lo + hi)
        got = rate(math.exp(mid))
        if abs(got - censor_rate) < tol:
            return math.exp(mid)
        if got < censor_rate:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(f"could not calibrate lambda for censor rate {censor_rate}")


def observed_sampler(target: GenGammaSpec, lam: float | None, events_only: bool = False,
                     kappa: float = 1.0):
    """Sampler ``(rng, size) -> observed times`` for the biased law G.

    ``kappa`` is the size-bias degree of the lifetimes (1 for prevalent
    sampling, 0 for plain draws from the target).
    """
    law = size_bias(target, kappa) if kappa > 0 else target

    def lifetimes(rng: np.random.Generator, size: int) -> np.ndarray:
        return sample(law, size, rng)

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        y = lifetimes(rng, size)
        if lam is None:
            return y
        values, events = censor_forward(y, lam, rng)
        if not events_only:
            return values
        kept = values[events]
        while kept.size < size:
            extra, ev = censor_forward(lifetimes(rng, size), lam, rng)
            kept = np.concatenate([kept, extra[ev]])
        return kept[:size]

    return draw


def target_sampler(target: GenGammaSpec):
    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        return sample(target, size, rng)

    return draw


def empirical_coverage(target: GenGammaSpec, lam: float | None, n: int, r: int, m: int, q: float,
                       reps: int, seed: SeedLike, events_only: bool = False,
                       kappa: float = 1.0, chunk: int = 2_000_000) -> tuple[float, float]:
    """Fraction of ``reps`` biased samples whose limits cover at least q.

    ``lam=None`` (or 0) means no censoring; ``kappa=0`` samples the target
    itself.  Returns ``(coverage, stderr)``.
    """
    if not n > r + m:
        raise DomainError(f"need n > r + m = {r + m}, got n={n}")
    lam = lam or None
    rng = make_rng(seed)
    draw = observed_sampler(target, lam, events_only, kappa)
    rows_per_chunk = max(1, chunk // n)
    hits = 0
    done = 0
    while done < reps:
        rows = min(rows_per_chunk, reps - done)
        y = draw(rng, rows * n).reshape(rows, n)
        lo_idx, hi_idx = r - 1, n - m
        part = np.partition(y, (lo_idx, hi_idx), axis=1)
        cov = gengamma_cdf(part[:, hi_idx], target) - gengamma_cdf(part[:, lo_idx], target)
        hits += int(np.count_nonzero(cov >= q))
        done += rows
    p = hits / reps
    return p, math.sqrt(p * (1.0 - p) / reps)


def _cell_seed(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), *[int(k) for k in key]])


def build_map(config: SimConfig, ti: int, ci: int) -> tuple[QuantileMap, float | None]:
    """Analytic map without censoring; Monte Carlo map otherwise."""
    target = config.targets[ti]
    rate = config.censor_rates[ci]
    if rate == 0.0 and not config.events_only:
        return analytic_map(target, 1.0, config.knot_count), None
    lam = None
    if rate > 0.0:
        lam = calibrate_lambda(target, rate, _cell_seed(config.seed, ti, ci, 7001))
    qmap = monte_carlo_map(
        target_sampler(target),
        observed_sampler(target, lam, config.events_only),
        draws=config.draws,
        knot_count=config.knot_count,
        seed=_cell_seed(config.seed, ti, ci, 7002),
        meta={"censor_rate": rate, "lambda": lam, "events_only": config.events_only},
    )
    return qmap, lam


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def _run_block(args) -> list[dict]:
    config, ti, ci, timing = args
    target = config.targets[ti]
    rate = config.censor_rates[ci]
    qmap, lam = build_map(config, ti, ci)
    rows = []
    for r in config.r_grid:
        for m in config.m_grid:
            spec = ToleranceSpec(r, m, config.q, config.alpha)
            for mi, method in enumerate(config.methods):
                row = {"target_shape": target.shape_alpha, "target_rate": target.rate_beta,
                       "censor_rate": rate, "r": r, "m": m, "method": method}
                t0 = time.perf_counter()
                try:
                    if method == "scheffe":
                        n = scheffe_tukey_sample_size(spec).n
                    elif method == "ineq":
                        n = sample_size_inequality(spec, qmap).n
                    else:
                        n = sample_size_fft(spec, qmap, config.fft).n
                    elapsed = (time.perf_counter() - t0) * 1000.0
                    cov, se = empirical_coverage(
                        target, lam, n, r, m, config.q, config.replications,
                        _cell_seed(config.seed, ti, ci, r, m, mi), config.events_only,
                    )
                    row.update(n=n, coverage=cov, stderr=se,
                               runtime_ms=round(elapsed, 3) if timing else 0)
                except BiastolError as exc:
                    row.update(n="", coverage="", stderr="", runtime_ms="", error=str(exc))
                    log.warning("cell %s failed: %s", row, exc)
                rows.append(row)
    return rows


def run_grid(config: SimConfig, jobs: int = 1, timing: bool = True) -> list[dict]:
    """Run every cell of the grid; rows come back in a fixed order.

    ``runtime_ms`` is wall time of the sample-size computation; pass
    ``timing=False`` to write zeros and make the output byte-reproducible.
    """
    blocks = [(config, ti, ci, timing) for ti in range(len(config.targets))
              for ci in range(len(config.censor_rates))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_block, blocks))
    else:
        results = [_run_block(b) for b in blocks]
    return [row for block in results for row in block]


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_fmt(row.get(col, "")) for col in CSV_HEADER])
    return buf.getvalue()


def write_csv(rows: Sequence[dict], path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(rows))
