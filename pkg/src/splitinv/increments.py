"""Maximal increments of partial sums.

For a window function ``a_T`` the normalisation is
``beta_T = (2 a_T [log(T / a_T) + log log T])^(-1/2)`` and the statistic is

    beta_n * max_{1<=k<=n-a_n} max_{1<=l<=a_n} |S_{k+l} - S_k| / sigma,

whose limsup is 1 for i.i.d. standard Gaussian increments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ConfigError, DataError
from .mc_engine import ExperimentConfig, Report, run
from .processes import ProcessSpec, SamplePath, generate, theoretical_sigma2

FORMS = ("power", "proportional", "explicit")
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class WindowRule:
    """Window length ``a_T``: ``T**rho`` (power), ``c*T`` (proportional) or a
    lookup ``table`` of ``(T, a_T)`` pairs (explicit)."""

    form: str = "power"
    rho: float | None = None
    c: float | None = None
    table: tuple | None = None

    def __post_init__(self):
        if self.form not in FORMS:
            raise ConfigError(f"window form must be one of {FORMS}")
        if self.form == "power" and (self.rho is None or not 0 < self.rho <= 1):
            raise ConfigError("power windows need 0 < rho <= 1")
        if self.form == "proportional" and (self.c is None or not 0 < self.c <= 1):
            raise ConfigError("proportional windows need 0 < c <= 1")
        if self.form == "explicit":
            if not self.table:
                raise ConfigError("explicit windows need a table of (T, a_T) pairs")
            object.__setattr__(self, "table", tuple(sorted((float(t), float(a)) for t, a in self.table)))

    def a(self, T: float) -> float:
        if self.form == "power":
            a = T ** self.rho
        elif self.form == "proportional":
            a = self.c * T
        else:
            hits = [a for t, a in self.table if t == T]
            if not hits:
                raise ConfigError(f"explicit window table has no entry for T={T}")
            a = hits[0]
        if not 0 < a <= T:
            raise ConfigError(f"window a_T={a} outside (0, T] at T={T}")
        return a

    def check_grid(self, grid: Sequence[float]) -> None:
        """Raise unless ``0 < a_T <= T`` and ``T / a_T`` is nondecreasing on ``grid``."""
        ts = sorted(float(t) for t in grid)
        ratios = [t / self.a(t) for t in ts]
        if any(r2 < r1 * (1 - 1e-12) for r1, r2 in zip(ratios, ratios[1:])):
            raise ConfigError("T / a_T must be nondecreasing")


def beta(rule: WindowRule, T: float) -> float:
    """``(2 a_T [log(T/a_T) + log log T])^(-1/2)`` for ``T > e``."""
    if not T > math.e:
        raise ConfigError(f"beta_T needs T > e, got T={T}")
    a = rule.a(T)
    bracket = math.log(T / a) + math.log(math.log(T))
    if not bracket > 0:
        raise ConfigError(f"beta_T bracket is not positive at T={T}")
    return (2.0 * a * bracket) ** -0.5


def window_length(rule: WindowRule, n: int) -> int:
    """``floor(a_n)`` (guarded against round-off just below an integer)."""
    return int(math.floor(rule.a(n) + _FLOOR_EPS))


@dataclass(frozen=True)
class WindowMax:
    value: float
    k: int
    ell: int


def _values(path) -> np.ndarray:
    if isinstance(path, SamplePath):
        return np.asarray(path.values, dtype=np.float64)
    return np.asarray(path, dtype=np.float64)


def coarse_lags(a_n: int, per_octave: int = 8) -> np.ndarray:
    """Geometric lag grid on ``[1, a_n]`` including both ends."""
    num = max(2, int(per_octave * math.log2(max(a_n, 2))) + 1)
    grid = np.unique(np.round(np.geomspace(1, a_n, num)).astype(np.int64))
    return np.unique(np.concatenate([grid, [a_n]])).astype(np.int64)


def window_max(path, a_n: int, coarse: bool = False) -> WindowMax:
    """``max_{1<=k<=n-a_n} max_{1<=l<=a_n} |Y_{k+1} + ... + Y_{k+l}|``.

    Exact O(n a_n) scan over prefix sums; ties go to the smallest ``k`` then
    the smallest ``l``.  ``coarse=True`` scans only a geometric grid of ``l``
    (plus ``l = a_n``), giving a lower bound.
    """
    x = _values(path)
    n = x.shape[0]
    a_n = int(a_n)
    if not 1 <= a_n <= n - 1:
        raise ConfigError(f"window length a_n={a_n} outside [1, n-1] for n={n}")
    s = np.concatenate([[0.0], np.cumsum(x)])
    if coarse:
        value, k, ell = kernels.window_max(s, a_n, coarse_lags(a_n))
    else:
        value, k, ell = kernels.window_max(s, a_n)
    return WindowMax(float(value), int(k), int(ell))


def increment_statistic(path, rule: WindowRule, sigma: float, coarse: bool = False) -> float:
    """``beta_n * window_max(path, floor(a_n)) / sigma``."""
    if not sigma > 0:
        raise ConfigError("sigma must be positive")
    n = _values(path).shape[0]
    if n < 3:
        raise DataError("increment statistic needs at least 3 observations")
    return beta(rule, n) * window_max(path, window_length(rule, n), coarse).value / sigma


def increment_study(spec: ProcessSpec, n: int, rule: WindowRule, reps: int, seed: int,
                    sigma: float | None = None, parallelism: int = 1,
                    coarse: bool = False) -> Report:
    """Replicate :func:`increment_statistic` over independent simulated paths.

    ``sigma`` defaults to the closed-form long-run standard deviation of the
    spec (linear and moving-average kinds).
    """
    if sigma is None:
        s2 = theoretical_sigma2(spec)
        if s2 is None:
            raise ConfigError("sigma is required for specs without a closed-form long-run variance")
        sigma = math.sqrt(s2)
    beta(rule, n)

    def payload(s):
        return increment_statistic(generate(spec, n, s), rule, sigma, coarse)

    cfg = ExperimentConfig(payload, reps, seed, parallelism, name="increments",
                           labels=["statistic"],
                           params={"n": n, "sigma": sigma, "window": window_length(rule, n),
                                   "coarse": coarse})
    return run(cfg)
