"""Pure-numpy versions of the scan kernels in ``_kernels.pyx``."""
import numpy as np


def weighted_pair_max(b, w, need_argmax=True):
    b = np.ascontiguousarray(b, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    n = b.shape[0]
    if w.shape[0] < n:
        raise ValueError("weight array shorter than the sequence")
    if n < 2:
        return 0.0, -1, -1
    imax = int(np.argmax(b))
    imin = int(np.argmin(b))
    rng = float(b[imax] - b[imin])
    eligible = np.flatnonzero(w[1:n] > 0.0) + 1
    if eligible.size == 0:
        return 0.0, -1, -1
    if rng == 0.0:
        return 0.0, 0, int(eligible[0])

    best, bi, bj = -1.0, -1, -1

    def scan(d):
        diffs = np.abs(b[d:] - b[:-d])
        i = int(np.argmax(diffs))
        return float(diffs[i]) / float(w[d]), i

    d0 = abs(imax - imin)
    if w[d0] > 0.0:
        best, bi = scan(d0)
        bj = bi + d0
    else:
        d0 = 0
    bounds = rng / w[eligible]
    for d, bound in zip(eligible.tolist(), bounds.tolist()):
        if d == d0:
            continue
        if bound < best or (not need_argmax and bound <= best):
            continue
        val, i = scan(d)
        if val > best or (need_argmax and val == best and (i < bi or (i == bi and i + d < bj))):
            best, bi, bj = val, i, i + d
    return best, bi, bj


def window_max(s, a, lags=None):
    s = np.ascontiguousarray(s, dtype=np.float64)
    n = s.shape[0] - 1
    if a < 1 or a > n - 1:
        raise ValueError("window length out of range")
    base = s[1:n - a + 1]
    ells = range(1, a + 1) if lags is None else [int(x) for x in lags]
    best, bk, bl = -1.0, 1, 1
    for ell in ells:
        v = np.abs(s[1 + ell:n - a + 1 + ell] - base)
        i = int(np.argmax(v))
        val = float(v[i])
        k = i + 1
        if val > best or (val == best and k < bk):
            best, bk, bl = val, k, ell
    return best, bk, bl


def garch_sigma2(e, omega, alpha, beta, s0):
    e = np.asarray(e, dtype=np.float64)
    out = np.empty_like(e)
    out[:, 0] = s0
    e2 = e * e
    for t in range(1, e.shape[1]):
        out[:, t] = omega + (beta + alpha * e2[:, t - 1]) * out[:, t - 1]
    return out
