"""Quantile mappings between the target law F and the sampling law G.

A :class:`QuantileMap` stores both directions of the map
``phi = G o F^-1`` and ``phi_inv = F o G^-1`` as piecewise-linear
functions on a shared probability grid.  Every way bias enters the
tolerance solvers goes through one of these objects, and there are four
ways to build one:

* :func:`identity_map` for unbiased sampling (G = F);
* :func:`analytic_map` for a Generalized Gamma target under size bias;
* :func:`monte_carlo_map` from two samplers;
* :func:`pilot_map` from estimated CDFs of pilot data.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from biastol.distributions import GenGammaSpec, SeedLike, gengamma_cdf, gengamma_quantile, size_bias
from biastol.errors import DomainError, InsufficientDrawsError

DEFAULT_KNOTS = 1001
DEFAULT_DRAWS = 1_000_000
KINDS = ("identity", "analytic", "montecarlo", "pilot")

Sampler = Callable[[np.random.Generator, int], np.ndarray]


def knot_grid(knot_count: int = DEFAULT_KNOTS, tail_lo: float = 1e-8, tail_hi: float = 1e-2,
              per_decade: int = 24) -> np.ndarray:
    """Uniform grid on [0, 1] refined geometrically near both endpoints.

    The tail refinement covers ``[tail_lo, tail_hi]`` and its mirror image
    below 1, so that extreme quantiles of order statistics are resolved.
    """
    if knot_count < 2:
        raise DomainError("knot_count must be at least 2")
    uniform = np.linspace(0.0, 1.0, knot_count)
    decades = math.log10(tail_hi / tail_lo)
    tail = np.logspace(math.log10(tail_lo), math.log10(tail_hi), int(round(decades * per_decade)) + 1)
    grid = np.concatenate([uniform, tail, 1.0 - tail])
    grid = np.unique(np.clip(grid, 0.0, 1.0))
    # drop points that coincide to rounding with a neighbour
    keep = np.concatenate([[True], np.diff(grid) > 1e-15])
    grid = grid[keep]
    grid[0], grid[-1] = 0.0, 1.0
    return grid


@dataclass(frozen=True, eq=False)
class QuantileMap:
    """Monotone piecewise-linear ``phi`` and ``phi_inv`` on a common grid.

    ``knots_p`` is strictly increasing from 0 to 1; ``v_forward[i]`` is
    ``phi(knots_p[i])`` and ``v_inverse[i]`` is ``phi_inv(knots_p[i])``.
    """

    knots_p: np.ndarray
    v_forward: np.ndarray
    v_inverse: np.ndarray
    kind: str = "identity"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.ascontiguousarray(self.knots_p, dtype=np.float64)
        vf = np.ascontiguousarray(self.v_forward, dtype=np.float64)
        vi = np.ascontiguousarray(self.v_inverse, dtype=np.float64)
        object.__setattr__(self, "knots_p", p)
        object.__setattr__(self, "v_forward", vf)
        object.__setattr__(self, "v_inverse", vi)
        if self.kind not in KINDS:
            raise DomainError(f"unknown map kind {self.kind!r}")
        if p.ndim != 1 or p.shape != vf.shape or p.shape != vi.shape or p.size < 2:
            raise DomainError("knot arrays must be 1-D with equal length >= 2")
        for name, arr in (("knots_p", p), ("v_forward", vf), ("v_inverse", vi)):
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} contains non-finite values")
            if arr[0] != 0.0 or arr[-1] != 1.0:
                raise DomainError(f"{name} must start at 0 and end at 1")
        if np.any(np.diff(p) <= 0):
            raise DomainError("knots_p must be strictly increasing")
        if np.any(np.diff(vf) < 0) or np.any(np.diff(vi) < 0):
            raise DomainError("map values must be nondecreasing")
        if self.kind != "identity":
            err = self.round_trip_error()
            tol = self.mesh_tolerance()
            if err > tol:
                raise DomainError(
                    f"forward and inverse maps disagree: round-trip error {err:.3g} > {tol:.3g}"
                )

    def mesh_tolerance(self) -> float:
        """Round-trip bound from the grid's modulus of continuity."""
        return float(max(np.diff(self.knots_p).max(), np.diff(self.v_forward).max(),
                         np.diff(self.v_inverse).max())) + 1e-9

    def round_trip_error(self) -> float:
        z = np.linspace(0.0, 1.0, 2001)
        return float(np.max(np.abs(self.forward(self.inverse(z)) - z)))

    @staticmethod
    def _check(z) -> np.ndarray:
        zs = np.asarray(z, dtype=np.float64)
        if np.any((zs < 0.0) | (zs > 1.0)) or np.any(np.isnan(zs)):
            raise DomainError("quantile map argument outside [0, 1]")
        return zs

    def forward(self, z):
        """phi(z) = G(F^-1(z))."""
        out = np.interp(self._check(z), self.knots_p, self.v_forward)
        return float(out) if np.ndim(z) == 0 else out

    def inverse(self, p):
        """phi_inv(p) = F(G^-1(p))."""
        out = np.interp(self._check(p), self.knots_p, self.v_inverse)
        return float(out) if np.ndim(p) == 0 else out

    # -- serialization -------------------------------------------------

    def to_json(self) -> str:
        def arr(a: np.ndarray) -> str:
            return "[" + ", ".join(format(float(v), ".17g") for v in a) + "]"

        return (
            "{"
            f'"kind": {json.dumps(self.kind)}, '
            f'"knots_p": {arr(self.knots_p)}, '
            f'"knots_v_forward": {arr(self.v_forward)}, '
            f'"knots_v_inverse": {arr(self.v_inverse)}, '
            f'"meta": {json.dumps(self.meta, sort_keys=True)}'
            "}\n"
        )

    @classmethod
    def from_json(cls, text: str) -> "QuantileMap":
        doc = json.loads(text)
        try:
            return cls(
                np.asarray(doc["knots_p"], dtype=float),
                np.asarray(doc["knots_v_forward"], dtype=float),
                np.asarray(doc["knots_v_inverse"], dtype=float),
                kind=doc["kind"],
                meta=doc.get("meta", {}),
            )
        except KeyError as exc:
            raise DomainError(f"map document missing field {exc}") from None

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "QuantileMap":
        return cls.from_json(Path(path).read_text())


def _finish(p: np.ndarray, vf: np.ndarray, vi: np.ndarray, kind: str, meta: dict) -> QuantileMap:
    vf = np.clip(np.maximum.accumulate(vf), 0.0, 1.0)
    vi = np.clip(np.maximum.accumulate(vi), 0.0, 1.0)
    vf[0] = vi[0] = 0.0
    vf[-1] = vi[-1] = 1.0
    return QuantileMap(p, vf, vi, kind=kind, meta=meta)


def identity_map() -> QuantileMap:
    p = np.array([0.0, 1.0])
    return QuantileMap(p, p.copy(), p.copy(), kind="identity", meta={})


def analytic_map(target: GenGammaSpec, kappa: float = 1.0, knot_count: int = DEFAULT_KNOTS) -> QuantileMap:
    """Exact map for a Generalized Gamma target observed under size bias of degree ``kappa``."""
    biased = size_bias(target, kappa)
    p = knot_grid(knot_count)
    inner = p[1:-1]
    vf = np.empty_like(p)
    vi = np.empty_like(p)
    vf[1:-1] = gengamma_cdf(gengamma_quantile(inner, target), biased)
    vi[1:-1] = gengamma_cdf(gengamma_quantile(inner, biased), target)
    vf[0] = vi[0] = 0.0
    vf[-1] = vi[-1] = 1.0
    meta = {
        "target": [target.shape_alpha, target.rate_beta, target.shape_delta],
        "kappa": kappa,
        "knot_count": knot_count,
    }
    return _finish(p, vf, vi, "analytic", meta)


def _ecdf_linear(sorted_x: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = sorted_x.size
    levels = (np.arange(n) + 0.5) / n
    return np.interp(x, sorted_x, levels, left=0.0, right=1.0)


def _quantile_linear(sorted_x: np.ndarray, p: np.ndarray) -> np.ndarray:
    n = sorted_x.size
    levels = (np.arange(n) + 0.5) / n
    return np.interp(p, levels, sorted_x)


def monte_carlo_map(
    target_sampler: Sampler,
    biased_sampler: Sampler,
    draws: int = DEFAULT_DRAWS,
    knot_count: int = DEFAULT_KNOTS,
    seed: SeedLike = None,
    meta: dict | None = None,
) -> QuantileMap:
    """Estimate the map by matching empirical quantiles of two samplers.

    Each sampler is called as ``sampler(rng, size)``; the two draws use
    independent child streams of ``seed``.
    """
    if draws < 10 * knot_count:
        raise InsufficientDrawsError(f"need at least {10 * knot_count} draws, got {draws}")
    if seed is None:
        raise TypeError("monte_carlo_map requires an explicit seed")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    s_target, s_biased = ss.spawn(2)
    xf = np.sort(np.asarray(target_sampler(np.random.Generator(np.random.Philox(s_target)), draws), dtype=float))
    xg = np.sort(np.asarray(biased_sampler(np.random.Generator(np.random.Philox(s_biased)), draws), dtype=float))
    p = knot_grid(knot_count)
    vf = _ecdf_linear(xg, _quantile_linear(xf, p))
    vi = _ecdf_linear(xf, _quantile_linear(xg, p))
    info: dict[str, Any] = {"draws": int(draws), "knot_count": knot_count}
    if isinstance(seed, (int, np.integer)):
        info["seed"] = int(seed)
    info.update(meta or {})
    return _finish(p, vf, vi, "montecarlo", info)


def pilot_map(fhat, ghat, knot_count: int = DEFAULT_KNOTS) -> QuantileMap:
    """Map from two estimated step CDFs (see :mod:`biastol.pilot`).

    Both step functions are linearized through ``(0, 0)`` and their jump
    points before composing.
    """
    for est in (fhat, ghat):
        if len(est.support) < 2:
            raise DomainError("estimated CDF needs at least 2 support points")
    p = knot_grid(knot_count)
    vf = ghat.linear_cdf(fhat.linear_quantile(p))
    vi = fhat.linear_cdf(ghat.linear_quantile(p))
    meta = {"n_f": len(fhat.support), "n_g": len(ghat.support), "knot_count": knot_count}
    return _finish(p, vf, vi, "pilot", meta)
