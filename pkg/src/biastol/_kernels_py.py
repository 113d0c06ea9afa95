"""Pure-Python/numpy fallback for the compiled ``_kernels`` module.

Same continued fractions, same stopping rule.  The array versions run
the Lentz recurrences on whole vectors and freeze entries as they
converge, so the iteration count is set by the slowest element.
"""
from __future__ import annotations

import math

import numpy as np

FPMIN = 1e-300
EPS = 4e-16
MAXIT = 20000


def _betacf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return h
    return math.nan


def betainc(x: float, a: float, b: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    front = math.exp(a * math.log(x) + b * math.log1p(-x) - lbeta)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def gammainc(a: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    front = math.exp(-x + a * math.log(x) - math.lgamma(a))
    if x < a + 1.0:
        ap = a
        total = delta = 1.0 / a
        for _ in range(MAXIT):
            ap += 1.0
            delta *= x / ap
            total += delta
            if abs(delta) < abs(total) * EPS:
                return total * front
        return math.nan
    b = x + 1.0 - a
    c = 1.0 / FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, MAXIT + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return 1.0 - front * h
    return math.nan


def _floor_abs(v: np.ndarray) -> np.ndarray:
    return np.where(np.abs(v) < FPMIN, FPMIN, v)


def _betacf_vec(a: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 / _floor_abs(1.0 - qab * x / qap)
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, MAXIT + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            return h
        aa_, bb, xx = a[idx], b[idx], x[idx]
        cc, dd = c[idx], d[idx]
        m2 = 2 * m
        num = m * (bb - m) * xx / ((qam[idx] + m2) * (aa_ + m2))
        dd = 1.0 / _floor_abs(1.0 + num * dd)
        cc = _floor_abs(1.0 + num / cc)
        step = dd * cc
        num = -(aa_ + m) * (qab[idx] + m) * xx / ((aa_ + m2) * (qap[idx] + m2))
        dd = 1.0 / _floor_abs(1.0 + num * dd)
        cc = _floor_abs(1.0 + num / cc)
        delta = dd * cc
        h[idx] *= step * delta
        c[idx], d[idx] = cc, dd
        active[idx[np.abs(delta - 1.0) < EPS]] = False
    h[active] = np.nan
    return h


def betainc_array(x, a: float, b: float) -> np.ndarray:
    xs = np.asarray(x, dtype=np.float64)
    flat = xs.ravel()
    out = np.where(flat >= 1.0, 1.0, 0.0)
    inner = np.nonzero((flat > 0.0) & (flat < 1.0))[0]
    if inner.size:
        xi = flat[inner]
        lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
        front = np.exp(a * np.log(xi) + b * np.log1p(-xi) - lbeta)
        swap = xi >= (a + 1.0) / (a + b + 2.0)
        aa = np.where(swap, b, a)
        bb = np.where(swap, a, b)
        xx = np.where(swap, 1.0 - xi, xi)
        cf = _betacf_vec(aa, bb, xx)
        val = front * cf / aa
        out[inner] = np.where(swap, 1.0 - val, val)
    return out.reshape(xs.shape)


def gammainc_array(a: float, x) -> np.ndarray:
    xs = np.asarray(x, dtype=np.float64)
    flat = xs.ravel()
    out = np.zeros(flat.shape)
    pos = np.nonzero(flat > 0.0)[0]
    if pos.size == 0:
        return out.reshape(xs.shape)
    xp = flat[pos]
    front = np.exp(-xp + a * np.log(xp) - math.lgamma(a))
    res = np.empty_like(xp)

    ser = xp < a + 1.0
    if ser.any():
        xv = xp[ser]
        total = np.full(xv.shape, 1.0 / a)
        delta = total.copy()
        ap = a
        active = np.ones(xv.shape, dtype=bool)
        for _ in range(MAXIT):
            ap += 1.0
            delta = np.where(active, delta * xv / ap, 0.0)
            total += delta
            active &= np.abs(delta) >= np.abs(total) * EPS
            if not active.any():
                break
        res[ser] = total * front[ser]

    cf = ~ser
    if cf.any():
        xv = xp[cf]
        b = xv + 1.0 - a
        c = np.full(xv.shape, 1.0 / FPMIN)
        d = 1.0 / b
        h = d.copy()
        active = np.ones(xv.shape, dtype=bool)
        for i in range(1, MAXIT + 1):
            an = -i * (i - a)
            b = b + 2.0
            d = 1.0 / _floor_abs(an * d + b)
            c = _floor_abs(b + an / c)
            delta = np.where(active, d * c, 1.0)
            h *= delta
            active &= np.abs(delta - 1.0) >= EPS
            if not active.any():
                break
        res[cf] = 1.0 - front[cf] * h

    out[pos] = res
    return out.reshape(xs.shape)
