"""Epidemic change-point test based on weighted maximal centred increments.

For observations ``X_1..X_n`` with partial sums ``S_k`` the statistic is

    UI(n, alpha) = n^(-1/2) max_{1<=i<j<=n}
                   |S_j - S_i - (j-i) S_n / n| / [((j-i)/n)(1 - (j-i)/n)]^alpha

and, after division by a long-run standard deviation, it is compared with the
supremum of ``|B(t) - B(s)| / [(t-s)(1-(t-s))]^alpha`` over a Brownian bridge
``B``.  At ``alpha = 0`` that supremum is the bridge range, whose law is
Kuiper's: ``P(V >= x) = sum_k 2(4k^2x^2 - 1) exp(-2k^2x^2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .dependence import RateFit, long_run_variance
from .errors import ConfigError, DataError
from .mc_engine import empirical_quantile, map_replications, rng_for
from .processes import ProcessSpec, SamplePath, generate, inject_epidemic

MIN_GRID = 256
MIN_TABLE_REPS = 1000


def _values(path) -> np.ndarray:
    if isinstance(path, SamplePath):
        return np.asarray(path.values, dtype=np.float64)
    return np.asarray(path, dtype=np.float64)


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha < 0.5:
        raise ConfigError(f"weight exponent alpha={alpha} must satisfy 0 <= alpha < 1/2 "
                          "(alpha >= 1/2 gives a degenerate limit)")


def span_weights(n: int, alpha: float) -> np.ndarray:
    """``w[d] = ((d/n)(1 - d/n))^alpha`` for ``d = 1..n-1``; ``w[0] = w[n] = 0``
    mark the lags that are never scanned."""
    d = np.arange(n + 1, dtype=np.float64) / n
    w = (d * (1.0 - d)) ** alpha
    w[0] = 0.0
    w[n] = 0.0
    return w


@dataclass(frozen=True)
class UIResult:
    value: float
    i: int
    j: int


def ui_statistic(path, alpha: float, min_span: int = 1, stride: int = 1) -> UIResult:
    """Exact ``UI(n, alpha)`` with its maximising pair ``(i, j)`` (1-based).

    Ties go to the smallest ``i`` then the smallest ``j``.  For long series a
    cheaper lower bound is available by restricting to spans
    ``j - i >= min_span`` and/or to the pair grid ``i, j = 1 + stride*r``.
    """
    x = _values(path)
    n = x.shape[0]
    if n < 2:
        raise DataError("the UI statistic needs at least 2 observations")
    _check_alpha(alpha)
    if min_span < 1 or stride < 1:
        raise ConfigError("min_span and stride must be positive")
    s = np.cumsum(x)
    k = np.arange(1, n + 1, dtype=np.float64)
    b = s - (k / n) * s[-1]
    w = span_weights(n, alpha)[:n].copy()
    w[:min(min_span, n)] = 0.0
    if stride > 1:
        b = np.ascontiguousarray(b[::stride])
        w = np.ascontiguousarray(w[::stride])
    value, i, j = kernels.weighted_pair_max(b, w)
    if i < 0:
        return UIResult(0.0, 1, 2)
    return UIResult(value / math.sqrt(n), i * stride + 1, j * stride + 1)


def bridge_functional(increments: np.ndarray, alpha: float) -> float:
    """Weighted range supremum of the discrete bridge built from ``increments``
    (``grid`` i.i.d. standard normals) on ``t_i = i / grid``."""
    g = increments.shape[0]
    w = np.concatenate([[0.0], np.cumsum(increments)]) / math.sqrt(g)
    t = np.arange(g + 1, dtype=np.float64) / g
    bridge = w - t * w[-1]
    return kernels.weighted_pair_max(bridge, span_weights(g, alpha), need_argmax=False)[0]


def kuiper_sf(x: float, terms: int = 100) -> float:
    """``P(V >= x)`` for the range of a standard Brownian bridge."""
    if x <= 0:
        return 1.0
    k = np.arange(1, terms + 1, dtype=np.float64)
    q = 2.0 * k * k * x * x
    return float(np.sum(2.0 * (2.0 * q - 1.0) * np.exp(-q)))


def kuiper_quantile(level: float) -> float:
    """Solve ``P(V <= x) = level`` for the bridge range by bisection."""
    from scipy.optimize import brentq

    if not 0 < level < 1:
        raise ConfigError("level must lie in (0, 1)")
    return float(brentq(lambda x: 1.0 - kuiper_sf(x) - level, 0.3, 5.0, xtol=1e-14))


@dataclass(frozen=True, eq=False)
class CriticalValueTable:
    alpha: float
    grid: int
    reps: int
    seed: int
    values: np.ndarray

    def quantile(self, q: float) -> tuple[float, float, float]:
        """Ceiling-index quantile with its 95% order-statistic interval."""
        return empirical_quantile(self.values, q)

    def p_value(self, statistic: float) -> float:
        """``(r + 1) / (reps + 1)`` with ``r`` the number of values ``>= statistic``."""
        r = self.values.shape[0] - int(np.searchsorted(self.values, statistic, side="left"))
        return (r + 1) / (self.values.shape[0] + 1)

    def save(self, path) -> None:
        lines = [f"# alpha: {self.alpha!r}", f"# grid: {self.grid}", f"# reps: {self.reps}",
                 f"# seed: {self.seed}"]
        lines += [repr(float(v)) for v in self.values]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "CriticalValueTable":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise DataError(f"cannot read table {path}: {exc}") from None
        header, values = {}, []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                header[key.strip()] = val.strip()
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise DataError(f"{path}: line {lineno} is not a number: {line!r}") from None
        try:
            alpha, grid = float(header["alpha"]), int(header["grid"])
            reps, seed = int(header["reps"]), int(header["seed"])
        except (KeyError, ValueError):
            raise DataError(f"{path}: header must give alpha, grid, reps and seed") from None
        arr = np.array(values)
        if arr.shape[0] != reps:
            raise DataError(f"{path}: header says reps={reps} but {arr.shape[0]} values follow")
        if np.any(np.diff(arr) < 0):
            raise DataError(f"{path}: values are not sorted")
        return cls(alpha, grid, reps, seed, arr)


def _null_sample(alpha, grid, reps, seed, parallelism, steps=(1,)):
    def one(i, s):
        z = rng_for(s).standard_normal(grid)
        out = []
        for step in steps:
            zz = z if step == 1 else z.reshape(-1, step).sum(axis=1) / math.sqrt(step)
            out.append(bridge_functional(zz, alpha))
        return out

    return np.array(map_replications(one, seed, reps, parallelism))


def simulate_null_reference(alpha: float, grid: int = 4096, reps: int = 10_000, seed: int = 0,
                            parallelism: int = 1) -> CriticalValueTable:
    """Monte Carlo table of the weighted bridge supremum.

    Replication ``r`` draws ``grid`` standard normals from stream
    ``child_seed(seed, r)``, forms the bridge on ``t_i = i/grid`` and takes the
    supremum over all grid pairs.
    """
    _check_alpha(alpha)
    if grid < MIN_GRID:
        raise ConfigError(f"grid must be at least {MIN_GRID}")
    if reps < MIN_TABLE_REPS:
        raise ConfigError(f"tables need reps >= {MIN_TABLE_REPS}")
    vals = _null_sample(alpha, grid, reps, seed, parallelism)[:, 0]
    return CriticalValueTable(float(alpha), int(grid), int(reps), int(seed), np.sort(vals))


def grid_sensitivity(alpha: float, grid: int, reps: int, seed: int,
                     quantiles: Sequence[float] = (0.9, 0.95, 0.99),
                     parallelism: int = 1) -> dict:
    """Quantiles at ``grid`` and at ``grid / 2`` from the same Brownian paths
    (the coarse bridge aggregates pairs of fine increments)."""
    _check_alpha(alpha)
    if grid % 2 or grid < 2 * MIN_GRID:
        raise ConfigError(f"grid must be even and at least {2 * MIN_GRID}")
    vals = _null_sample(alpha, grid, reps, seed, parallelism, steps=(1, 2))
    fine, coarse = np.sort(vals[:, 0]), np.sort(vals[:, 1])
    return {q: (empirical_quantile(fine, q)[0], empirical_quantile(coarse, q)[0]) for q in quantiles}


@dataclass(frozen=True)
class UIConfig:
    """``sigma_method`` is ``"plugin"`` (Bartlett long-run variance of the
    data) or ``"external"`` (use ``sigma``)."""

    alpha: float
    level: float = 0.05
    sigma_method: str = "plugin"
    sigma: float | None = None
    bandwidth: int | None = None

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not 0 < self.level < 1:
            raise ConfigError("level must lie in (0, 1)")
        if self.sigma_method not in ("plugin", "external"):
            raise ConfigError("sigma_method must be 'plugin' or 'external'")
        if self.sigma_method == "external" and (self.sigma is None or not self.sigma > 0):
            raise ConfigError("an external sigma must be positive")


@dataclass(frozen=True)
class TestResult:
    statistic: float
    sigma: float
    p_value: float
    reject: bool
    interval: tuple
    ui: float
    config: dict = field(default_factory=dict)

    __test__ = False


def epidemic_test(path, config: UIConfig, table: CriticalValueTable) -> TestResult:
    """Test for an epidemic mean shift; ``interval`` is the maximising pair."""
    if table.alpha != config.alpha:
        raise ConfigError(f"table alpha={table.alpha} does not match test alpha={config.alpha}")
    x = _values(path)
    if config.sigma_method == "plugin":
        if x.shape[0] < 30:
            raise DataError("plug-in sigma needs at least 30 observations")
        sigma = math.sqrt(long_run_variance(x, config.bandwidth))
    else:
        sigma = float(config.sigma)
    ui = ui_statistic(x, config.alpha)
    stat = ui.value / sigma
    p = table.p_value(stat)
    echo = {"alpha": config.alpha, "level": config.level, "sigma_method": config.sigma_method,
            "bandwidth": config.bandwidth, "n": int(x.shape[0]), "table_reps": table.reps,
            "table_grid": table.grid, "table_seed": table.seed}
    return TestResult(stat, sigma, p, bool(p < config.level), (ui.i, ui.j), ui.value, echo)


def consistency_drift(n: int, ell: int, delta: float, alpha: float) -> float:
    """``(ell (n - ell))^(1-alpha) |delta| / n^(3/2 - 2 alpha)``."""
    if not 1 <= ell <= n - 1:
        raise ConfigError("epidemic length must satisfy 1 <= ell <= n - 1")
    return (ell * (n - ell)) ** (1.0 - alpha) * abs(delta) / n ** (1.5 - 2.0 * alpha)


@dataclass(frozen=True)
class PowerPoint:
    delta: float
    power: float
    std_error: float
    drift: float
    rejections: int
    reps: int


def epidemic_window(n: int, ell: int) -> tuple[int, int]:
    """Centred epidemic ``(m1, m2)`` of length ``ell``."""
    m1 = (n - ell) // 2
    return max(m1, 1), max(m1, 1) + ell


def power_curve(spec: ProcessSpec, n: int, config: UIConfig, table: CriticalValueTable,
                deltas: Sequence[float], ell: int, reps: int, seed: int,
                parallelism: int = 1) -> list[PowerPoint]:
    """Rejection rates under centred epidemics of length ``ell``.

    Replication ``r`` draws one null path from ``child_seed(seed, r)`` and adds
    each shift in ``deltas`` to it, so the curve uses common random numbers.
    """
    if reps < 200:
        raise ConfigError("power curves need reps >= 200")
    if not 1 <= ell <= n - 2:
        raise ConfigError("epidemic length must satisfy 1 <= ell <= n - 2")
    m1, m2 = epidemic_window(n, ell)
    if m2 > n:
        raise ConfigError("epidemic does not fit in the sample")
    deltas = [float(d) for d in deltas]

    def one(i, s):
        base = generate(spec, n, s)
        return [epidemic_test(inject_epidemic(base, m1, m2, d), config, table).reject
                for d in deltas]

    hits = np.array(map_replications(one, seed, reps, parallelism), dtype=bool)
    out = []
    for c, d in enumerate(deltas):
        r = int(hits[:, c].sum())
        pw = r / reps
        out.append(PowerPoint(d, pw, math.sqrt(pw * (1 - pw) / reps),
                              consistency_drift(n, ell, d, config.alpha), r, reps))
    return out


@dataclass(frozen=True)
class AlphaRange:
    eta_min: float
    alpha_max: float
    admissible: bool
    note: str = "advisory: based on (1+eta)/p < 1/2 - alpha with the smallest eta the fitted rate allows"


def admissible_alpha(fit: RateFit, p: float) -> AlphaRange:
    """Weight exponents compatible with a fitted dependence rate and moment order.

    For a polynomial rate ``m^-A`` the smallest usable ``eta`` solves
    ``A = (p-2)/(2 eta) (1 - (1+eta)/p)``, i.e.
    ``eta = (p-2)(p-1) / (2 A p + p - 2)`` (and ``A > 1`` is required); an
    exponential rate allows any ``eta > 0``.  Admissible ``alpha`` then satisfy
    ``alpha < 1/2 - (1 + eta)/p``.
    """
    if not p > 2:
        raise ConfigError("p must exceed 2")
    if fit.kind == "exponential":
        eta = 0.0
    else:
        A = fit.exponent
        if not A > 1:
            return AlphaRange(math.inf, 0.0, False)
        eta = (p - 2.0) * (p - 1.0) / (2.0 * A * p + p - 2.0)
    amax = 0.5 - (1.0 + eta) / p
    return AlphaRange(eta, max(amax, 0.0), amax > 0)
