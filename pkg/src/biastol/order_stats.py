"""Law of F(Y_j) for the j-th order statistic of a biased sample.

If Y_1 <= ... <= Y_n are drawn from G and F is the target CDF, then
``G(Y_j)`` is Beta(j, n + 1 - j), so

    H_j(z) = P[F(Y_j) <= z] = pbeta(phi(z); j, n + 1 - j)
    H_j^-1(p) = phi_inv(qbeta(p; j, n + 1 - j))

with ``phi``/``phi_inv`` taken from a :class:`QuantileMap`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from biastol._backend import betainc_array
from biastol.distributions import chisq_quantile, pbeta, qbeta
from biastol.errors import DomainError, InfeasibleError
from biastol.quantile_map import QuantileMap


@dataclass(frozen=True)
class OrderStatLaw:
    j: int
    n: int
    map: QuantileMap

    def __post_init__(self):
        if not (1 <= self.j <= self.n):
            raise DomainError(f"need 1 <= j <= n, got j={self.j}, n={self.n}")

    def cdf(self, z):
        return hcdf(self, z)

    def ppf(self, p: float) -> float:
        return hquantile(self, p)


def hcdf(law: OrderStatLaw, z):
    """H_j(z); vectorised over ``z``.

    Arguments outside [0, 1] raise for scalars.  Array input is clipped so
    grids extending past the unit interval (FFT discretization) get 0 / 1.
    """
    a, b = law.j, law.n + 1 - law.j
    if np.ndim(z) == 0:
        zf = float(z)
        if not 0.0 <= zf <= 1.0:
            raise DomainError(f"hcdf: z={zf} outside [0, 1]")
        return pbeta(law.map.forward(zf), a, b)
    zs = np.clip(np.asarray(z, dtype=np.float64), 0.0, 1.0)
    return betainc_array(law.map.forward(zs), a, b)


def hquantile(law: OrderStatLaw, p: float) -> float:
    """H_j^-1(p)."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"hquantile: p={p} outside [0, 1]")
    return law.map.inverse(qbeta(p, law.j, law.n + 1 - law.j))


def scheffe_tukey_ratio(n: float, j: int, alpha_j: float) -> float:
    """``(n - (j-1)/2 - x/4) / (n - (j-1)/2 + x/4)``, x the chi-square(2j) quantile at 1 - alpha_j.

    One-sided formulas use 2j degrees of freedom (not 2k as in the
    two-sided design).
    """
    x = chisq_quantile(1.0 - alpha_j, 2 * j)
    centre = n - 0.5 * (j - 1)
    return (centre - 0.25 * x) / (centre + 0.25 * x)


def _feasible_ratio(n: float, j: int, alpha_j: float, label: str) -> float:
    if not n > j:
        raise InfeasibleError(f"{label}: need n > {j}, got n={n}")
    rho = scheffe_tukey_ratio(n, j, alpha_j)
    if rho < 0.0 or math.isnan(rho):
        raise InfeasibleError(f"{label}: Scheffé-Tukey ratio negative at n={n}")
    return rho


def one_sided_lower(n: float, r: int, alpha_r: float, qmap: QuantileMap) -> float:
    """q_r with P[F(Y_r) <= 1 - q_r] >= 1 - alpha_r: ``1 - phi_inv(1 - rho_r)``."""
    rho = _feasible_ratio(n, r, alpha_r, "one_sided_lower")
    return 1.0 - qmap.inverse(1.0 - rho)


def one_sided_upper(n: float, m: int, alpha_m: float, qmap: QuantileMap) -> float:
    """q_m with P[F(Y_{n+1-m}) >= q_m] >= 1 - alpha_m: ``phi_inv(rho_m)``."""
    rho = _feasible_ratio(n, m, alpha_m, "one_sided_upper")
    return qmap.inverse(rho)
