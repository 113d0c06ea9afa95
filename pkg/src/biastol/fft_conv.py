"""Grid densities and the FFT convolution behind the two-sided FFT solver.

The coverage of the tolerance interval is ``D = F(Y_{n+1-m}) - F(Y_r)``.
Treating the two order statistics as independent, the law of D is the
convolution of the law of ``F(Y_{n+1-m})`` with the law of ``-F(Y_r)``.
Both laws are discretized on one grid of step ``dx`` (each over its own
effective support only), and the mass vectors are convolved with a real
FFT of size ``len_a + len_b``, which already exceeds the linear
convolution length, so no zero-padding to a common range is needed.

Cell masses are exact CDF increments, so the discretized law telescopes
to the captured probability even where the density is unbounded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from biastol.errors import DomainError
from biastol.order_stats import OrderStatLaw, hcdf, hquantile
from biastol.quantile_map import QuantileMap

PADDINGS = ("exact", "nextpow2")


@dataclass(frozen=True)
class FFTConfig:
    epsilon: float = 1e-6
    target_cells: int = 4096
    padding: str = "nextpow2"

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1e-4:
            raise DomainError(f"epsilon must lie in (0, 1e-4], got {self.epsilon}")
        if self.target_cells < 64:
            raise DomainError("target_cells must be at least 64")
        if self.padding not in PADDINGS:
            raise DomainError(f"padding must be one of {PADDINGS}")


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Probability masses on a uniform grid.

    For ``order == 1`` mass ``i`` is spread uniformly over the cell
    ``[origin + i*step, origin + (i+1)*step)``.  A convolution of two such
    densities has ``order == 2``: mass ``k`` is the triangular kernel on
    ``[origin + k*step, origin + (k+2)*step]``.
    """

    origin: float
    step: float
    masses: np.ndarray
    order: int = 1
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "masses", np.asarray(self.masses, dtype=np.float64))
        if not self.step > 0:
            raise DomainError("grid step must be positive")
        if self.masses.ndim != 1 or self.masses.size == 0:
            raise DomainError("masses must be a nonempty 1-D array")
        if self.order not in (1, 2):
            raise DomainError("only order 1 and 2 grids are supported")

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    @property
    def edges(self) -> np.ndarray:
        return self.origin + self.step * np.arange(self.masses.size + 1)

    def cdf_points(self, normalize: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """Exact CDF of the piecewise density at the grid points.

        Linear interpolation between the returned points is exact for
        order 1 and second-order accurate for order 2.
        """
        c = self.masses
        if self.order == 1:
            inc = c
        else:
            inc = np.convolve(c, [0.5, 0.5])
        cdf = np.concatenate([[0.0], np.cumsum(inc)])
        if normalize:
            cdf = cdf / cdf[-1]
        x = self.origin + self.step * np.arange(cdf.size)
        return x, np.minimum(cdf, 1.0)

    def quantile(self, p: float) -> float:
        """Left-continuous inverse of the piecewise-linear CDF (renormalized)."""
        x, cdf = self.cdf_points()
        if not 0.0 <= p <= 1.0:
            raise DomainError("probability outside [0, 1]")
        i = int(np.searchsorted(cdf, p, side="left"))
        if i == 0:
            return float(x[0])
        if i >= cdf.size:
            return float(x[-1])
        lo, hi = cdf[i - 1], cdf[i]
        t = 0.0 if hi <= lo else (p - lo) / (hi - lo)
        return float(x[i - 1] + t * (x[i] - x[i - 1]))

    def cdf(self, z):
        x, cdf = self.cdf_points()
        return np.interp(z, x, cdf, left=0.0, right=1.0)

    def reflected(self) -> "GridDensity":
        """Law of ``-X``: masses reversed on the mirrored grid."""
        width = self.masses.size + (self.order - 1)
        return GridDensity(-(self.origin + width * self.step), self.step, self.masses[::-1].copy(),
                           self.order, dict(self.info))


def support_bounds(law: OrderStatLaw, epsilon: float) -> tuple[float, float]:
    """``(H^-1(eps/2), H^-1(1 - eps/2))``."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    lo = hquantile(law, 0.5 * epsilon)
    hi = hquantile(law, 1.0 - 0.5 * epsilon)
    return lo, hi


def snap_out(lo: float, hi: float, step: float) -> tuple[int, int]:
    """Integer grid indices ``(i0, i1)`` with ``i0*step <= lo`` and ``i1*step >= hi``."""
    i0 = math.floor(lo / step + 1e-9)
    i1 = math.ceil(hi / step - 1e-9)
    if i1 <= i0:
        i1 = i0 + 1
    return i0, i1


def discretize(law: OrderStatLaw, negate: bool, lo: float, hi: float, step: float) -> GridDensity:
    """Discretize ``F(Y_j)`` (or ``-F(Y_j)`` when ``negate``) on ``[lo, hi]``.

    ``lo``/``hi`` bound the support of the law itself (before negation);
    the interval is snapped outward to multiples of ``step`` so grids built
    with the same step align exactly.
    """
    if not step > 0:
        raise DomainError("grid step must be positive")
    if negate:
        i0, i1 = snap_out(-hi, -lo, step)
        edges = step * np.arange(i0, i1 + 1)
        h = hcdf(law, -edges)
        masses = h[:-1] - h[1:]
    else:
        i0, i1 = snap_out(lo, hi, step)
        edges = step * np.arange(i0, i1 + 1)
        h = hcdf(law, edges)
        masses = np.diff(h)
    masses = np.maximum(masses, 0.0)
    return GridDensity(i0 * step, step, masses, 1, {"j": law.j, "n": law.n, "negated": negate})


def _next_pow2(n: int) -> int:
    return 1 << (n - 1).bit_length()


def convolve(a: GridDensity, b: GridDensity, padding: str = "nextpow2") -> GridDensity:
    """Linear convolution of two aligned grid densities via a real FFT."""
    if a.masses.size == 0 or b.masses.size == 0:
        raise DomainError("cannot convolve an empty density")
    if a.step != b.step:
        raise DomainError(f"grid steps differ: {a.step!r} vs {b.step!r}")
    if a.order != 1 or b.order != 1:
        raise DomainError("convolve expects order-1 (cell-uniform) inputs")
    size = a.masses.size + b.masses.size
    nfft = _next_pow2(size) if padding == "nextpow2" else size
    fa = np.fft.rfft(a.masses, nfft)
    fb = np.fft.rfft(b.masses, nfft)
    out = np.fft.irfft(fa * fb, nfft)[:size]
    out[-1] = 0.0
    np.maximum(out, 0.0, out=out)
    return GridDensity(a.origin + b.origin, a.step, out, 2, {"fft_size": nfft})


def difference_law(n: int, r: int, m: int, qmap: QuantileMap, config: FFTConfig | None = None) -> GridDensity:
    """Approximate law of ``F(Y_{n+1-m}) - F(Y_r)`` assuming independence."""
    config = config or FFTConfig()
    if not n > r + m:
        raise DomainError(f"need n > r + m = {r + m}, got n={n}")
    upper = OrderStatLaw(n + 1 - m, n, qmap)
    lower = OrderStatLaw(r, n, qmap)
    lo_m, hi_m = support_bounds(upper, config.epsilon)
    lo_r, hi_r = support_bounds(lower, config.epsilon)
    width = (hi_m - lo_m) + (hi_r - lo_r)
    if not width > 0:
        raise DomainError("degenerate order-statistic support")
    step = width / config.target_cells
    a = discretize(upper, False, lo_m, hi_m, step)
    b = discretize(lower, True, lo_r, hi_r, step)
    d = convolve(a, b, config.padding)
    captured = a.total * b.total
    d.info.update(
        {
            "step": step,
            "cells_upper": int(a.masses.size),
            "cells_lower": int(b.masses.size),
            "truncated_mass": 1.0 - captured,
            "bounds_upper": (lo_m, hi_m),
            "bounds_lower": (lo_r, hi_r),
        }
    )
    return d
