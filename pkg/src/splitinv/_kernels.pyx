# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled scan kernels.

Every function here has a pure-numpy twin in :mod:`splitinv._pykernels` with
the same signature and the same tie-breaking; :mod:`splitinv.kernels` picks one
at import time.
"""
import numpy as np

from libc.math cimport fabs
from libc.stdlib cimport free, malloc


cdef inline double _lag_max(const double[::1] b, Py_ssize_t n, Py_ssize_t d) noexcept nogil:
    # four independent accumulators; max is exact, so the order is irrelevant
    cdef Py_ssize_t i, end = n - d, end4 = (n - d) & ~3
    cdef double m0 = 0.0, m1 = 0.0, m2 = 0.0, m3 = 0.0, x0, x1, x2, x3
    for i in range(0, end4, 4):
        x0 = fabs(b[i + d] - b[i])
        x1 = fabs(b[i + 1 + d] - b[i + 1])
        x2 = fabs(b[i + 2 + d] - b[i + 2])
        x3 = fabs(b[i + 3 + d] - b[i + 3])
        m0 = x0 if x0 > m0 else m0
        m1 = x1 if x1 > m1 else m1
        m2 = x2 if x2 > m2 else m2
        m3 = x3 if x3 > m3 else m3
    for i in range(end4, end):
        x0 = fabs(b[i + d] - b[i])
        m0 = x0 if x0 > m0 else m0
    m0 = m1 if m1 > m0 else m0
    m2 = m3 if m3 > m2 else m2
    return m2 if m2 > m0 else m0


cdef inline Py_ssize_t _lag_first(const double[::1] b, Py_ssize_t n, Py_ssize_t d,
                                  double m) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(n - d):
        if fabs(b[i + d] - b[i]) == m:
            return i
    return 0


def weighted_pair_max(const double[::1] b, const double[::1] w, bint need_argmax=True):
    """Maximise ``|b[j] - b[i]| / w[j - i]`` over ``0 <= i < j < len(b)``.

    Lags with ``w[d] <= 0`` are skipped.  Ties go to the smallest ``i``, then
    the smallest ``j``.  Returns ``(value, i, j)``; ``(0.0, -1, -1)`` when no
    lag is eligible.

    Lags are pruned with the bound ``(max b - min b) / w[d]`` after seeding
    the running maximum with the lag that separates the extremes of ``b``.
    """
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t i, d, d0, imax = 0, imin = 0, bi = -1, bj = -1, fi
    cdef double best = -1.0, rng, bound, m, val, lo, hi
    if w.shape[0] < n:
        raise ValueError("weight array shorter than the sequence")
    if n < 2:
        return 0.0, -1, -1
    with nogil:
        lo = b[0]
        hi = b[0]
        for i in range(1, n):
            if b[i] > hi:
                hi = b[i]
                imax = i
            if b[i] < lo:
                lo = b[i]
                imin = i
        rng = hi - lo
        if rng == 0.0:
            for d in range(1, n):
                if w[d] > 0.0:
                    best = 0.0
                    bi = 0
                    bj = d
                    break
        else:
            d0 = imax - imin if imax > imin else imin - imax
            if w[d0] > 0.0:
                m = _lag_max(b, n, d0)
                best = m / w[d0]
                bi = _lag_first(b, n, d0, m)
                bj = bi + d0
            else:
                d0 = 0
            for d in range(1, n):
                if w[d] <= 0.0 or d == d0:
                    continue
                bound = rng / w[d]
                if bound < best or (not need_argmax and bound <= best):
                    continue
                m = _lag_max(b, n, d)
                val = m / w[d]
                if val > best:
                    best = val
                    if need_argmax:
                        bi = _lag_first(b, n, d, m)
                        bj = bi + d
                elif need_argmax and val == best:
                    fi = _lag_first(b, n, d, m)
                    if fi < bi or (fi == bi and fi + d < bj):
                        bi = fi
                        bj = fi + d
    if best < 0.0:
        return 0.0, -1, -1
    return best, bi, bj


def window_max(const double[::1] s, Py_ssize_t a, const long[::1] lags=None):
    """Maximise ``|s[k + l] - s[k]|`` over ``1 <= k <= n - a`` and ``1 <= l <= a``.

    ``s`` holds prefix sums ``S_0..S_n``.  When ``lags`` is given only those
    window lengths (ascending, each in ``[1, a]``) are scanned.  Ties go to the
    smallest ``k``, then the smallest ``l``.

    The full scan is O(n): for each ``k`` the extreme prefix sums over
    ``s[k+1..k+a]`` come from monotone deques that keep the earliest index
    among equal values.
    """
    cdef Py_ssize_t n = s.shape[0] - 1
    cdef Py_ssize_t k, l, j, nl, bk = 1, bl = 1
    cdef Py_ssize_t hmax = 0, tmax = 0, hmin = 0, tmin = 0, jn = 2, lu, ld
    cdef Py_ssize_t *qmax
    cdef Py_ssize_t *qmin
    cdef double best = -1.0, v, base, up, dn
    if a < 1 or a > n - 1:
        raise ValueError("window length out of range")
    if lags is not None:
        nl = lags.shape[0]
        with nogil:
            for k in range(1, n - a + 1):
                base = s[k]
                for j in range(nl):
                    l = lags[j]
                    v = fabs(s[k + l] - base)
                    if v > best:
                        best = v
                        bk = k
                        bl = l
        return best, bk, bl
    qmax = <Py_ssize_t *> malloc((n + 1) * sizeof(Py_ssize_t))
    qmin = <Py_ssize_t *> malloc((n + 1) * sizeof(Py_ssize_t))
    if qmax == NULL or qmin == NULL:
        free(qmax)
        free(qmin)
        raise MemoryError()
    with nogil:
        for k in range(1, n - a + 1):
            while jn <= k + a:
                v = s[jn]
                while tmax > hmax and s[qmax[tmax - 1]] < v:
                    tmax -= 1
                qmax[tmax] = jn
                tmax += 1
                while tmin > hmin and s[qmin[tmin - 1]] > v:
                    tmin -= 1
                qmin[tmin] = jn
                tmin += 1
                jn += 1
            while qmax[hmax] <= k:
                hmax += 1
            while qmin[hmin] <= k:
                hmin += 1
            base = s[k]
            up = s[qmax[hmax]] - base
            dn = base - s[qmin[hmin]]
            lu = qmax[hmax] - k
            ld = qmin[hmin] - k
            if up > dn:
                v = up
                l = lu
            elif dn > up:
                v = dn
                l = ld
            else:
                v = up
                l = lu if lu < ld else ld
            if v > best:
                best = v
                bk = k
                bl = l
    free(qmax)
    free(qmin)
    return best, bk, bl


def garch_sigma2(const double[:, ::1] e, double omega, double alpha, double beta,
                 const double[::1] s0):
    """Run ``s[t] = omega + (beta + alpha * e[t-1]**2) * s[t-1]`` row by row."""
    cdef Py_ssize_t rows = e.shape[0], T = e.shape[1], r, t
    out = np.empty((rows, T), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double x
    with nogil:
        for r in range(rows):
            o[r, 0] = s0[r]
            for t in range(1, T):
                x = e[r, t - 1]
                o[r, t] = omega + (beta + alpha * (x * x)) * o[r, t - 1]
    return out
