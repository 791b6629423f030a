"""Empirical weak-dependence diagnostics.

* :func:`estimate_delta` - Monte Carlo estimate of ``||Y_0 - Y_0^(m)||_p``.
* :func:`fit_rate` - polynomial vs exponential decay law for ``delta(m)``.
* :func:`long_run_variance` - Bartlett-kernel estimate of ``sum_k E Y_0 Y_k``.
* :func:`moment_growth` - ratios ``E|S_n|^p / n^(p/2)``.
* :func:`check_power_inequality` - the binomial-type bound on ``|a + b|^p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .errors import ConfigError, DataError, ExactMDependence
from .mc_engine import child_seed
from .processes import ProcessSpec, SamplePath, batch_rows, simulate_batch

_CHUNK = 4096
LRV_FLOOR = 1e-10


@dataclass(frozen=True)
class RateEstimate:
    m: int
    p: float
    value: float
    std_error: float
    reps: int


@dataclass(frozen=True)
class RateFit:
    """Fitted decay law.

    ``kind == "polynomial"``: ``delta(m) ~ scale * m**-exponent``;
    ``kind == "exponential"``: ``delta(m) ~ scale * exp(-exponent * m)``.
    """

    kind: str
    exponent: float
    scale: float
    fit_quality: float
    alternative_quality: float


@dataclass(frozen=True)
class MomentPoint:
    n: int
    ratio: float
    std_error: float
    max_ratio: float | None = None
    max_std_error: float | None = None


def _chunks(reps: int, size: int):
    c = 0
    for start in range(0, reps, size):
        yield c, min(size, reps - start)
        c += 1


def estimate_delta(spec: ProcessSpec, m: int, p: float, reps: int, seed: int) -> RateEstimate:
    """Estimate ``(E|Y_0 - Y_0^(m)|^p)^(1/p)`` from ``reps`` coupled draws.

    Each draw is an independent single-index coupled path (the index sits after
    any burn-in; by stationarity its position is irrelevant).  The standard
    error is the delta-method transform of the standard error of the p-th
    moment.
    """
    if reps < 100:
        raise ConfigError("estimate_delta needs reps >= 100")
    if not p >= 1:
        raise ConfigError("estimate_delta needs p >= 1")
    if m < 0:
        raise ConfigError("m must be non-negative")
    size = min(_CHUNK, batch_rows(spec, 1))
    moments = np.empty(reps)
    pos = 0
    for c, rows in _chunks(reps, size):
        y, ya = simulate_batch(spec, 1, rows, child_seed(seed, c), m=m)
        moments[pos:pos + rows] = np.abs(y[:, 0] - ya[:, 0]) ** p
        pos += rows
    M = float(np.mean(moments))
    if M == 0.0:
        return RateEstimate(int(m), float(p), 0.0, 0.0, int(reps))
    se_M = float(np.std(moments, ddof=1)) / math.sqrt(reps)
    value = M ** (1.0 / p)
    se = value / (p * M) * se_M
    return RateEstimate(int(m), float(p), value, se, int(reps))


def _r2(x: np.ndarray, y: np.ndarray):
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / tss if tss > 0 else 1.0
    return float(slope), float(intercept), r2


def fit_rate(points: Sequence[RateEstimate]) -> RateFit:
    """Choose between polynomial and exponential decay by least-squares fit
    quality (R^2) on the log-log and log-linear scales."""
    if points and all(pt.value == 0.0 for pt in points):
        raise ExactMDependence("all delta(m) estimates are zero: exact m-dependence, no rate to fit")
    usable = {}
    for pt in points:
        if pt.value > 0.0 and pt.m > 0:
            usable.setdefault(int(pt.m), float(pt.value))
    if len(usable) < 3:
        raise DataError("fit_rate needs at least 3 points with distinct m > 0 and positive values")
    ms = np.array(sorted(usable), dtype=np.float64)
    logv = np.log([usable[int(m)] for m in ms])
    s_pol, c_pol, r_pol = _r2(np.log(ms), logv)
    s_exp, c_exp, r_exp = _r2(ms, logv)
    if r_pol >= r_exp:
        fit = RateFit("polynomial", -s_pol, math.exp(c_pol), r_pol, r_exp)
    else:
        fit = RateFit("exponential", -s_exp, math.exp(c_exp), r_exp, r_pol)
    if not fit.exponent > 0:
        raise DataError(f"delta(m) does not decay (fitted exponent {fit.exponent:.4g})")
    return fit


def default_bandwidth(n: int) -> int:
    """``floor(n ** (1/3))`` computed exactly on integers."""
    b = int(round(n ** (1.0 / 3.0)))
    while b ** 3 > n:
        b -= 1
    while (b + 1) ** 3 <= n:
        b += 1
    return b


def _values(path) -> np.ndarray:
    if isinstance(path, SamplePath):
        return np.asarray(path.values, dtype=np.float64)
    return np.asarray(path, dtype=np.float64)


def long_run_variance(path, bandwidth: int | None = None, floor: bool = True) -> float:
    """Bartlett-kernel long-run variance of a (demeaned) series.

    ``gamma_0 + 2 sum_{k=1}^{b} (1 - k/b) gamma_k`` with ``b = floor(n^(1/3))``
    by default.  With ``floor=True`` the result is clamped below at
    ``1e-10 * (sample variance + 1e-30)``.
    """
    x = _values(path)
    n = x.shape[0]
    if n < 30:
        raise DataError(f"long-run variance needs at least 30 observations, got {n}")
    b = default_bandwidth(n) if bandwidth is None else int(bandwidth)
    if b < 0 or b >= n:
        raise ConfigError("bandwidth must lie in [0, n - 1]")
    x = x - x.mean()
    s2 = float(np.dot(x, x)) / n
    total = s2
    for k in range(1, b + 1):
        total += 2.0 * (1.0 - k / b) * float(np.dot(x[:-k], x[k:])) / n
    if floor:
        total = max(total, LRV_FLOOR * (s2 + 1e-30))
    return total


def moment_growth(spec: ProcessSpec, p: float, n_grid: Sequence[int], reps: int, seed: int,
                  include_max: bool = False) -> list[MomentPoint]:
    """Monte Carlo ratios ``E|S_n|^p / n^(p/2)`` (and the running-maximum
    version when ``include_max``) for every ``n`` in ``n_grid``."""
    if not p >= 2:
        raise ConfigError("moment_growth needs p >= 2")
    if reps < 100:
        raise ConfigError("moment_growth needs reps >= 100")
    out = []
    for g, n in enumerate(n_grid):
        n = int(n)
        if n < 1:
            raise ConfigError("grid sizes must be positive")
        size = batch_rows(spec, n)
        sums = np.empty(reps)
        maxs = np.empty(reps) if include_max else None
        pos = 0
        for c, rows in _chunks(reps, size):
            y, _ = simulate_batch(spec, n, rows, child_seed(child_seed(seed, g), c))
            if include_max:
                partial = np.cumsum(y, axis=1)
                sums[pos:pos + rows] = partial[:, -1]
                maxs[pos:pos + rows] = np.max(np.abs(partial), axis=1)
            else:
                sums[pos:pos + rows] = y.sum(axis=1)
            pos += rows
        scale = n ** (p / 2.0)
        r = np.abs(sums) ** p / scale
        point = MomentPoint(n, float(r.mean()), float(r.std(ddof=1) / math.sqrt(reps)))
        if include_max:
            rm = maxs ** p / scale
            point = MomentPoint(n, point.ratio, point.std_error, float(rm.mean()),
                                float(rm.std(ddof=1) / math.sqrt(reps)))
        out.append(point)
    return out


def check_power_inequality(a, b, p: float, slack: float = 1e-12):
    """True iff the binomial-type power inequality holds up to relative slack.

    Vectorised over ``a`` and ``b``; returns a bool (scalar inputs) or an array.
    """
    if not p >= 1:
        raise ConfigError("the power inequality needs p >= 1")
    a_raw = np.asarray(a, dtype=np.float64)
    b_raw = np.asarray(b, dtype=np.float64)
    lhs = np.abs(a_raw + b_raw) ** p
    x, y = np.abs(a_raw), np.abs(b_raw)
    rhs = x ** p + y ** p
    for k in range(1, int(math.floor(p)) + 1):
        rhs = rhs + special.binom(p, k) * (x ** k * y ** (p - k) + y ** k * x ** (p - k))
    ok = lhs <= rhs * (1.0 + slack)
    return bool(ok) if np.ndim(ok) == 0 else ok
