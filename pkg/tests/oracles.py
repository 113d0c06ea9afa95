"""Independent reference computations shared by several test modules."""
import numpy as np
from scipy import integrate, optimize, stats


def independent_difference_cdf(z: float, n: int, r: int, m: int) -> float:
    """P(U - V <= z) for independent U ~ Beta(n+1-m, m), V ~ Beta(r, n+1-r).

    This is the exact law the FFT engine approximates under the identity map.
    """
    upper = stats.beta(n + 1 - m, m)
    lower = stats.beta(r, n + 1 - r)
    lo, hi = lower.ppf(1e-13), lower.ppf(1 - 1e-13)
    mode = (r - 1) / (n - 1) if r > 1 else lo
    # upper.cdf(z + v) has kinks where z + v leaves [0, 1]
    kinks = [t for t in (mode, -z, 1.0 - z) if lo < t < hi]
    val, _ = integrate.quad(lambda v: upper.cdf(z + v) * lower.pdf(v), lo, hi,
                            points=kinks or None, limit=400, epsabs=1e-13, epsrel=1e-11)
    return val


def independent_difference_quantile(p: float, n: int, r: int, m: int) -> float:
    return optimize.brentq(lambda z: independent_difference_cdf(z, n, r, m) - p, -1.0, 1.0, xtol=1e-12)


def direct_convolution(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros(a.size + b.size - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out
