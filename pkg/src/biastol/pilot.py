"""Pilot-study route: estimate G and F from biased, censored survival data.

``G`` (the law of observed times) is estimated by the plain empirical CDF
of all observed values.  ``F`` (the target law) is estimated by
nonparametric maximum likelihood under a declared size bias of degree
kappa (kappa = 1 is length bias) with right-censoring of the forward time.

Under prevalent sampling, an observation with total observed time x
contributes ``g(x) / x`` if the failure was seen and
``sum_{t > x} g(t) / t`` if it was censored, where ``g`` is the biased
law ``w(t) dF(t) / int w dF``.  The EM iteration below works on the
masses of ``g`` over the support, treating each censored subject's true
lifetime as missing, then maps back to ``F`` by inverse weighting.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from biastol.distributions import GenGammaSpec, SeedLike, make_rng
from biastol.errors import ConvergenceError, DomainError
from biastol.fft_conv import FFTConfig
from biastol.quantile_map import DEFAULT_KNOTS, QuantileMap, pilot_map
from biastol.tolerance_classic import ToleranceSpec, scheffe_tukey_sample_size
from biastol.tolerance_fft import sample_size_fft
from biastol.tolerance_inequality import sample_size_inequality

log = logging.getLogger(__name__)

REPORT_HEADER = ("r", "m", "n_scheffe", "n_ineq", "n_fft")
SWEEP_HEADER = ("q", "confidence", "n_scheffe", "n_ineq", "n_fft")


@dataclass(frozen=True)
class SizeBias:
    """Sampling weight ``w(y) = y**kappa``."""

    kappa: float = 1.0

    def __post_init__(self):
        if not self.kappa >= 0:
            raise DomainError("kappa must be nonnegative")

    def weight(self, y: np.ndarray) -> np.ndarray:
        return np.power(y, self.kappa)


LENGTH_BIAS = SizeBias(1.0)


@dataclass(frozen=True, eq=False)
class PilotSample:
    times: np.ndarray
    events: np.ndarray
    bias: SizeBias | None = LENGTH_BIAS

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        e = np.asarray(self.events, dtype=bool)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "events", e)
        if t.ndim != 1 or t.shape != e.shape:
            raise DomainError("times and events must be 1-D arrays of equal length")
        if t.size == 0:
            raise DomainError("pilot sample is empty")
        if not np.all(np.isfinite(t)) or np.any(t <= 0):
            raise DomainError("all observed times must be positive")
        if np.count_nonzero(e) < 2:
            raise DomainError("pilot sample needs at least 2 observed events")

    def __len__(self) -> int:
        return int(self.times.size)

    @classmethod
    def from_records(cls, records, bias: SizeBias | None = LENGTH_BIAS) -> "PilotSample":
        vals = [float(r[0]) for r in records]
        evs = [bool(r[1]) for r in records]
        return cls(np.array(vals), np.array(evs), bias)

    @property
    def censored_fraction(self) -> float:
        return 1.0 - float(np.mean(self.events))


@dataclass(frozen=True, eq=False)
class EstimatedCDF:
    """Right-continuous step CDF with jumps at ``support``."""

    support: np.ndarray
    cum_probs: np.ndarray
    kind: str = "empirical"
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.support, dtype=float)
        c = np.asarray(self.cum_probs, dtype=float)
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "cum_probs", c)
        if s.ndim != 1 or s.shape != c.shape or s.size == 0:
            raise DomainError("support and cum_probs must be 1-D arrays of equal nonzero length")
        if np.any(np.diff(s) <= 0) or s[0] <= 0:
            raise DomainError("support must be strictly increasing and positive")
        if np.any(np.diff(c) < -1e-15) or c[0] < 0 or abs(c[-1] - 1.0) > 1e-9:
            raise DomainError("cum_probs must be nondecreasing and end at 1")

    @property
    def masses(self) -> np.ndarray:
        return np.diff(np.concatenate([[0.0], self.cum_probs]))

    def cdf(self, x):
        idx = np.searchsorted(self.support, x, side="right")
        vals = np.concatenate([[0.0], self.cum_probs])[idx]
        return float(vals) if np.ndim(x) == 0 else vals

    def quantile(self, p):
        """Left-continuous inverse ``inf{x : F(x) >= p}``."""
        ps = np.asarray(p, dtype=float)
        idx = np.searchsorted(self.cum_probs - 1e-12, ps, side="left")
        out = self.support[np.minimum(idx, self.support.size - 1)]
        return float(out) if np.ndim(p) == 0 else out

    def _knots(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.concatenate([[0.0], self.support])
        c = np.concatenate([[0.0], self.cum_probs])
        c[-1] = 1.0
        return x, c

    def linear_cdf(self, x):
        """CDF linearized through ``(0, 0)`` and each ``(support_i, cum_probs_i)``."""
        kx, kc = self._knots()
        return np.interp(x, kx, kc, left=0.0, right=1.0)

    def linear_quantile(self, p):
        kx, kc = self._knots()
        keep = np.concatenate([[True], np.diff(kc) > 0])
        return np.interp(p, kc[keep], kx[keep])

    def to_json(self) -> str:
        return json.dumps({"support": [float(v) for v in self.support],
                           "cum_probs": [float(v) for v in self.cum_probs],
                           "kind": self.kind})

    @classmethod
    def from_json(cls, text: str) -> "EstimatedCDF":
        doc = json.loads(text)
        return cls(np.asarray(doc["support"]), np.asarray(doc["cum_probs"]), doc.get("kind", "empirical"))


def _step_cdf(values: np.ndarray, weights: np.ndarray, kind: str, info: dict | None = None) -> EstimatedCDF:
    support, inv = np.unique(values, return_inverse=True)
    mass = np.bincount(inv, weights=weights, minlength=support.size)
    cum = np.cumsum(mass) / mass.sum()
    cum[-1] = 1.0
    return EstimatedCDF(support, cum, kind, info or {})


def empirical_ghat(sample: PilotSample) -> EstimatedCDF:
    """Empirical CDF of all observed values, censored ones included."""
    if len(sample) == 0:
        raise DomainError("empty sample")
    return _step_cdf(sample.times, np.ones(len(sample)), "empirical")


def _loglik(g: np.ndarray, s: np.ndarray, ev_idx: np.ndarray, cens_start: np.ndarray) -> float:
    h = g / s
    tail = np.concatenate([np.cumsum(h[::-1])[::-1], [0.0]])
    with np.errstate(divide="ignore"):
        return math.fsum(np.concatenate([np.log(h[ev_idx]), np.log(tail[cens_start])]))


def npmle_fhat(sample: PilotSample, tolerance: float = 1e-10, max_iter: int = 10_000,
               keep_trace: bool = True) -> EstimatedCDF:
    """NPMLE of the target CDF under the declared size bias.

    Support is the set of observed event times, plus one point just above
    the largest censored time when no event lies beyond it (otherwise that
    subject would have zero likelihood).  ``info`` carries the iteration count and the
    log-likelihood trace.
    """
    if sample.bias is None:
        raise DomainError("npmle_fhat needs a declared bias; use empirical_ghat for unbiased data")
    t, ev = sample.times, sample.events
    if not ev.any():
        raise DomainError("all records are censored")
    s = np.unique(t[ev])
    cens = t[~ev]
    if cens.size and cens.max() >= s[-1]:
        # a censored record at or past the last event needs support strictly beyond it
        s = np.append(s, np.nextafter(cens.max(), np.inf))
    ev_idx = np.searchsorted(s, t[ev])
    cens_start = np.searchsorted(s, cens, side="right")
    n_total = t.size
    d_ev = np.bincount(ev_idx, minlength=s.size).astype(float)
    w = sample.bias.weight(s)

    g = np.full(s.size, 1.0 / s.size)
    p_old = (g / w) / np.sum(g / w)
    trace = []
    for it in range(1, max_iter + 1):
        h = g / s
        tail = np.concatenate([np.cumsum(h[::-1])[::-1], [0.0]])
        if keep_trace:
            trace.append(_loglik(g, s, ev_idx, cens_start))
        inv_tail = np.bincount(cens_start, weights=1.0 / tail[cens_start], minlength=s.size + 1)
        expected = d_ev + h * np.cumsum(inv_tail)[: s.size]
        g = expected / n_total
        p = (g / w) / np.sum(g / w)
        if np.max(np.abs(p - p_old)) < tolerance:
            break
        p_old = p
    else:
        raise ConvergenceError(f"NPMLE did not converge in {max_iter} iterations")
    if keep_trace:
        trace.append(_loglik(g, s, ev_idx, cens_start))
    cum = np.cumsum(p)
    cum[-1] = 1.0
    return EstimatedCDF(s, cum, "npmle", {"iterations": it, "loglik": trace, "g_masses": g})


def read_pilot_csv(path: str | Path, bias: SizeBias | None = LENGTH_BIAS) -> PilotSample:
    """Read a ``time,status`` CSV (status 1 = event, 0 = censored)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DomainError(f"{path}: empty file") from None
        if header[:2] != ["time", "status"]:
            raise DomainError(f"{path}: header must start with 'time,status', got {header}")
        if len(header) > 2:
            warnings.warn(f"{path}: ignoring extra columns {header[2:]}", stacklevel=2)
        times, events = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            try:
                tv = float(row[0])
                st = int(row[1])
            except (ValueError, IndexError):
                raise DomainError(f"{path}:{lineno}: malformed row {row}") from None
            if st not in (0, 1):
                raise DomainError(f"{path}:{lineno}: status must be 0 or 1")
            times.append(tv)
            events.append(st == 1)
    return PilotSample(np.array(times), np.array(events, dtype=bool), bias)


def write_pilot_csv(sample: PilotSample, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("time,status\n")
        for tv, ev in zip(sample.times, sample.events):
            fh.write(f"{tv:.6f},{int(ev)}\n")


def synthetic_cohort(seed: SeedLike, n: int = 821, mean_lifetime: float = 4.0,
                     censor_rate: float = 0.21) -> PilotSample:
    """Synthetic stand-in for a prevalent cohort.

    Exponential target lifetimes (mean ``mean_lifetime`` years), length-biased
    sampling and exponential censoring of the forward time calibrated to the
    requested censored fraction.
    """
    from biastol.sim_harness import calibrate_lambda, censor_forward, draw_length_biased

    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    s_cal, s_draw = ss.spawn(2)
    target = GenGammaSpec(1.0, 1.0 / mean_lifetime)
    lam = calibrate_lambda(target, censor_rate, make_rng(s_cal))
    rng = make_rng(s_draw)
    values, events = censor_forward(draw_length_biased(target, n, rng), lam, rng)
    values = np.round(values, 6)
    return PilotSample(values, events, LENGTH_BIAS)


def estimate_map(sample: PilotSample, knot_count: int = DEFAULT_KNOTS) -> QuantileMap:
    ghat = empirical_ghat(sample)
    fhat = ghat if sample.bias is None else npmle_fhat(sample)
    return pilot_map(fhat, ghat, knot_count)


def _design_cell(args) -> dict:
    qmap, r, m, q, alpha, config = args
    spec = ToleranceSpec(r, m, q, alpha)
    return {
        "n_scheffe": scheffe_tukey_sample_size(spec).n,
        "n_ineq": sample_size_inequality(spec, qmap).n,
        "n_fft": sample_size_fft(spec, qmap, config).n,
    }


def _run_cells(cells: list, jobs: int) -> list[dict]:
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_design_cell, cells))
    return [_design_cell(c) for c in cells]


def design_report(sample_or_map, r_grid: Sequence[int], m_grid: Sequence[int], q: float, alpha: float,
                  config: FFTConfig | None = None, jobs: int = 1) -> list[dict]:
    """Sample sizes of the three methods for each (r, m); rows ordered m-major as in a design table."""
    qmap = sample_or_map if isinstance(sample_or_map, QuantileMap) else estimate_map(sample_or_map)
    config = config or FFTConfig()
    keys = [(r, m) for m in m_grid for r in r_grid]
    results = _run_cells([(qmap, r, m, q, alpha, config) for r, m in keys], jobs)
    return [{"r": r, "m": m, **res} for (r, m), res in zip(keys, results)]


def sweep_report(sample_or_map, q_grid: Sequence[float], confidence_grid: Sequence[float],
                 r: int = 1, m: int = 1, config: FFTConfig | None = None, jobs: int = 1) -> list[dict]:
    """Sample sizes over a (q, 1 - alpha) grid at fixed r, m."""
    qmap = sample_or_map if isinstance(sample_or_map, QuantileMap) else estimate_map(sample_or_map)
    config = config or FFTConfig()
    keys = [(q, c) for c in confidence_grid for q in q_grid]
    results = _run_cells([(qmap, r, m, q, 1.0 - c, config) for q, c in keys], jobs)
    return [{"q": q, "confidence": c, **res} for (q, c), res in zip(keys, results)]


def report_csv(rows: Sequence[dict], header: Sequence[str] = REPORT_HEADER) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format(row[h], "g") if isinstance(row[h], float) else str(row[h])
                              for h in header))
    return "\n".join(lines) + "\n"
