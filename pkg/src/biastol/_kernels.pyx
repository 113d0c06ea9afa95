# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled special-function kernels.

Regularized incomplete beta and lower incomplete gamma, evaluated by
modified Lentz continued fractions (and a power series for the gamma
function below its mean).  ``_kernels_py`` mirrors this module in numpy.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, lgamma, fabs, NAN

cnp.import_array()

cdef double FPMIN = 1e-300
cdef double EPS = 4e-16
cdef int MAXIT = 20000


cdef double _betacf(double a, double b, double x) noexcept nogil:
    cdef double qab = a + b
    cdef double qap = a + 1.0
    cdef double qam = a - 1.0
    cdef double c = 1.0
    cdef double d = 1.0 - qab * x / qap
    cdef double h, aa, delta
    cdef int m, m2
    if fabs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < EPS:
            return h
    return NAN


cdef double _betainc(double x, double a, double b, double lbeta) noexcept nogil:
    cdef double front
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = exp(a * log(x) + b * log1p(-x) - lbeta)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


cdef double _gammainc(double a, double x, double lga) noexcept nogil:
    cdef double ap, total, delta, front, b, c, d, h, an
    cdef int i
    if x <= 0.0:
        return 0.0
    front = exp(-x + a * log(x) - lga)
    if x < a + 1.0:
        ap = a
        total = 1.0 / a
        delta = total
        for i in range(MAXIT):
            ap += 1.0
            delta *= x / ap
            total += delta
            if fabs(delta) < fabs(total) * EPS:
                return total * front
        return NAN
    b = x + 1.0 - a
    c = 1.0 / FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, MAXIT + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if fabs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < EPS:
            return 1.0 - front * h
    return NAN


cpdef double betainc(double x, double a, double b):
    return _betainc(x, a, b, lgamma(a) + lgamma(b) - lgamma(a + b))


cpdef double gammainc(double a, double x):
    return _gammainc(a, x, lgamma(a))


def betainc_array(x, double a, double b):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t n = xs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] xv = xs
    cdef double[::1] ov = out
    cdef double lbeta = lgamma(a) + lgamma(b) - lgamma(a + b)
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            ov[i] = _betainc(xv[i], a, b, lbeta)
    return out.reshape(np.shape(x))


def gammainc_array(double a, x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t n = xs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] xv = xs
    cdef double[::1] ov = out
    cdef double lga = lgamma(a)
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            ov[i] = _gammainc(a, xv[i], lga)
    return out.reshape(np.shape(x))
