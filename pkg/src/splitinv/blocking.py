"""Long/short block decomposition of partial sums into two variance ladders.

The positive integers are tiled as ``J_1, I_1, J_2, I_2, ...`` with long blocks
``|I_k| = floor(k^alpha)`` and short blocks ``|J_k| = floor(k^beta)``
(``beta < alpha``).  Index ``i`` is perturbed with window
``m_i = floor(eps1 * i^delta)``.  Sums over I-blocks and over J-blocks feed two
variance ladders ``s_n^2`` and ``t_n^2``; the first grows like ``sigma^2 n``,
the second like ``n^gamma`` with ``gamma < 1``.

With ``mode="exponential"`` (geometric decay of ``delta(m)``) blocks grow
logarithmically: ``|I_k| = ceil(log(k+2))^2``, ``|J_k| = ceil(log(k+2))`` and
``m_i = floor(eps1 * log i)``, giving ``t_n^2 ~ n / log n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DataError, SeparationError
from .mc_engine import child_seed
from .processes import (CoupledPath, ProcessSpec, SamplePath, batch_rows,
                        generate_coupled, simulate_batch)

MODES = ("polynomial", "exponential")
_FLOOR_EPS = 1e-9
_CHUNK = 4096


def _floor(x):
    return np.floor(np.asarray(x, dtype=np.float64) + _FLOOR_EPS).astype(np.int64)


@dataclass(frozen=True)
class SplitParams:
    p: float
    eta: float
    eps0: float
    eps1: float
    A_min: float
    alpha: float
    beta: float
    delta: float
    gamma: float
    mode: str = "polynomial"

    def block_lengths(self, k) -> tuple[np.ndarray, np.ndarray]:
        """``(|I_k|, |J_k|)`` for block indices ``k >= 1``; zero lengths lifted to 1."""
        k = np.asarray(k, dtype=np.float64)
        if self.mode == "exponential":
            short = np.ceil(np.log(k + 2.0)).astype(np.int64)
            return short * short, short
        return (np.maximum(_floor(k ** self.alpha), 1),
                np.maximum(_floor(k ** self.beta), 1))

    def window(self, i) -> np.ndarray:
        """Perturbation window ``m_i`` at (1-based) indices ``i``."""
        i = np.asarray(i, dtype=np.float64)
        if self.mode == "exponential":
            return _floor(self.eps1 * np.log(i))
        return _floor(self.eps1 * i ** self.delta)


def derive_params(p: float, eta: float, eps0: float, eps1: float = 0.5,
                  mode: str = "polynomial") -> SplitParams:
    """Blocking exponents from the moment order ``p`` and the tuning constants.

    ``alpha = 2 eta (1-eps0) / (p - 2(1+eta))``, ``beta = (1-eps0) alpha``,
    ``delta = beta / (1+alpha)`` and
    ``gamma = 1 - eps0 * 2 eta (1-eps0) / (p - 2(1 + eta eps0))``.
    ``A_min`` is the smallest polynomial decay exponent for which these
    choices apply.
    """
    if not p > 2:
        raise ConfigError("p must exceed 2")
    if not eta > 0:
        raise ConfigError("eta must be positive")
    if not 0 < eps0 < 0.5:
        raise ConfigError("eps0 must lie in (0, 1/2)")
    if not eps1 > 0:
        raise ConfigError("eps1 must be positive")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}")
    if not (1.0 + eta) / p < 0.5:
        raise ConfigError(f"parameter clause (1+eta)/p < 1/2 violated: (1+eta)/p = {(1 + eta) / p:.6g}")
    alpha = 2.0 * eta * (1.0 - eps0) / (p - 2.0 * (1.0 + eta))
    beta = (1.0 - eps0) * alpha
    delta = beta / (1.0 + alpha)
    gamma = 1.0 - eps0 * 2.0 * eta * (1.0 - eps0) / (p - 2.0 * (1.0 + eta * eps0))
    A_min = max((p - 2.0) / (2.0 * eta * (1.0 - eps0) ** 2) * (1.0 - (1.0 + eta) / p), 1.0)
    return SplitParams(p, eta, eps0, eps1, A_min, alpha, beta, delta, gamma, mode)


@dataclass(frozen=True, eq=False)
class BlockLayout:
    """Tiling of ``{1..n}``.  Arrays are indexed by block in tiling order.

    ``is_long[b]`` marks I-blocks; ``start``/``end`` are 1-based inclusive;
    ``complete[b]`` is False only for a final block cut by ``n``;
    ``m_schedule[b]`` is the window at the block's first index.
    """

    n: int
    params: SplitParams
    is_long: np.ndarray
    k: np.ndarray
    start: np.ndarray
    end: np.ndarray
    complete: np.ndarray
    m_schedule: np.ndarray
    separation_ok: bool
    first_violation: int | None

    @property
    def blocks(self) -> list[tuple[str, int, int, int]]:
        return [("I" if il else "J", int(k), int(s), int(e))
                for il, k, s, e in zip(self.is_long, self.k, self.start, self.end)]

    @property
    def lengths(self) -> np.ndarray:
        return self.end - self.start + 1

    def windows(self) -> np.ndarray:
        """Per-index windows ``m_1..m_n``."""
        return self.params.window(np.arange(1, self.n + 1))

    def complete_pairs(self) -> int:
        """Number of k with both J_k and I_k complete."""
        return int(np.sum(self.is_long & self.complete))


def _separation(params: SplitParams, short_len, long_start) -> int | None:
    bad = np.flatnonzero(short_len <= params.window(long_start))
    return int(bad[0]) + 1 if bad.size else None


def build_layout(n: int, params: SplitParams, check: bool = True,
                 adjust: bool = False, max_halvings: int = 30) -> BlockLayout:
    """Tile ``{1..n}`` as ``J_1, I_1, J_2, I_2, ...``.

    Separation (``|J_k| > m`` at the first index of ``I_k``) is checked for
    every ``k`` with ``I_k`` starting inside ``{1..n}``.  A violation raises
    :class:`SeparationError` naming the smallest failing ``k`` unless
    ``check=False``; with ``adjust=True`` ``eps1`` is halved first, up to
    ``max_halvings`` times.
    """
    if n < 2:
        raise ConfigError("a layout needs n >= 2")
    K = 16
    while True:
        ks = np.arange(1, K + 1)
        long_len, short_len = params.block_lengths(ks)
        total = np.cumsum(long_len + short_len)
        if total[-1] >= n:
            break
        K *= 2
    K = int(np.searchsorted(total, n)) + 1
    long_len, short_len = long_len[:K], short_len[:K]
    lengths = np.empty(2 * K, dtype=np.int64)
    lengths[0::2], lengths[1::2] = short_len, long_len
    ends = np.cumsum(lengths)
    nb = int(np.searchsorted(ends, n)) + 1
    lengths, ends = lengths[:nb], ends[:nb]
    starts = ends - lengths + 1
    complete = ends <= n
    ends = np.minimum(ends, n)
    is_long = (np.arange(nb) % 2) == 1
    kk = np.arange(nb) // 2 + 1

    long_starts = starts[is_long]
    violation = _separation(params, short_len[:long_starts.shape[0]], long_starts)
    if violation is not None and check:
        if adjust and max_halvings > 0:
            return build_layout(n, replace(params, eps1=params.eps1 / 2.0), check,
                                adjust, max_halvings - 1)
        m = int(params.window(long_starts[violation - 1]))
        raise SeparationError(violation,
                              f"separation fails at k={violation}: |J_k|={int(short_len[violation - 1])}"
                              f" <= m={m} at the first index of I_k; decrease eps1")
    return BlockLayout(int(n), params, is_long, kk, starts, ends, complete,
                       params.window(starts), violation is None, violation)


def _path_values(path) -> np.ndarray:
    if isinstance(path, CoupledPath):
        return np.asarray(path.y_approx, dtype=np.float64)
    if isinstance(path, SamplePath):
        return np.asarray(path.values, dtype=np.float64)
    return np.asarray(path, dtype=np.float64)


def block_sums(path, layout: BlockLayout) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(xi, eta)``: sums over the I-blocks and over the J-blocks.

    A :class:`CoupledPath` contributes its approximations ``y_approx``; pass
    one built by :func:`perturbed_path` for the per-index window schedule.
    The final partial block, if any, is included.
    """
    x = _path_values(path)
    if x.ndim != 1 or x.shape[0] != layout.n:
        raise DataError(f"path length {x.shape[-1]} does not match layout n={layout.n}")
    sums = np.add.reduceat(x, layout.start - 1)
    return sums[layout.is_long], sums[~layout.is_long]


def perturbed_path(spec: ProcessSpec, layout: BlockLayout, seed: int) -> CoupledPath:
    """Coupled path with ``Y'_i = Y_i^(m_i)`` under the layout's window schedule."""
    return generate_coupled(spec, layout.n, layout.windows(), seed)


@dataclass(frozen=True, eq=False)
class VarianceLadder:
    """Per-block variances and the cumulative ladders.

    ``b2``/``h2`` hold ``b_k^2`` and ``h_k^2`` for the complete I- and
    J-blocks, ``sigma2``/``tau2`` the per-index values over the complete part
    of the layout (length ``n_complete``), and ``s2``/``t2`` their cumulative
    sums.
    """

    layout: BlockLayout
    b2: np.ndarray
    h2: np.ndarray
    sigma2: np.ndarray
    tau2: np.ndarray
    s2: np.ndarray
    t2: np.ndarray

    @property
    def n_complete(self) -> int:
        return int(self.sigma2.shape[0])


def ladder_from_block_variances(layout: BlockLayout, b2, h2) -> VarianceLadder:
    """Assemble the ladder from per-block variances of the complete blocks."""
    done = layout.complete
    lengths = layout.lengths[done]
    is_long = layout.is_long[done]
    b2 = np.asarray(b2, dtype=np.float64)
    h2 = np.asarray(h2, dtype=np.float64)
    if b2.shape[0] != int(is_long.sum()) or h2.shape[0] != int((~is_long).sum()):
        raise ConfigError("block variance arrays do not match the complete blocks")
    per_block_sigma = np.zeros(is_long.shape[0])
    per_block_tau = np.zeros(is_long.shape[0])
    per_block_sigma[is_long] = b2
    per_block_tau[~is_long] = h2
    sigma2 = np.repeat(per_block_sigma, lengths)
    tau2 = np.repeat(per_block_tau, lengths)
    return VarianceLadder(layout, b2, h2, sigma2, tau2, np.cumsum(sigma2), np.cumsum(tau2))


def exact_ladder(layout: BlockLayout, sigma2: float) -> VarianceLadder:
    """Ladder with every ``b_k^2 = h_k^2 = sigma2`` (pure index counting)."""
    done = layout.complete
    n_long = int(np.sum(layout.is_long[done]))
    n_short = int(np.sum(~layout.is_long[done]))
    return ladder_from_block_variances(layout, np.full(n_long, float(sigma2)),
                                       np.full(n_short, float(sigma2)))


def estimate_block_variances(spec: ProcessSpec, layout: BlockLayout, reps: int, seed: int,
                             perturbed: bool = False) -> VarianceLadder:
    """Monte Carlo ``b_k^2 = Var(xi_k)/|I_k|`` and ``h_k^2 = Var(eta_k)/|J_k|``.

    Block sums are taken over ``Y`` by default and over the perturbed
    sequence ``Y'`` when ``perturbed=True``.
    """
    if reps < 100:
        raise ConfigError("estimate_block_variances needs reps >= 100")
    n = layout.n
    starts = layout.start - 1
    sums = np.empty((reps, starts.shape[0]))
    m = layout.windows() if perturbed else None
    size = min(_CHUNK, batch_rows(spec, n))
    pos = c = 0
    while pos < reps:
        rows = min(size, reps - pos)
        y, ya = simulate_batch(spec, n, rows, child_seed(seed, c), m=m)
        sums[pos:pos + rows] = np.add.reduceat(ya if perturbed else y, starts, axis=1)
        pos += rows
        c += 1
    done = layout.complete
    var = np.var(sums[:, done], axis=0, ddof=1) / layout.lengths[done]
    is_long = layout.is_long[done]
    return ladder_from_block_variances(layout, var[is_long], var[~is_long])


@dataclass(frozen=True)
class ScalingReport:
    """Empirical scaling of a variance ladder.

    ``n`` are the ends of complete I-blocks; ``s_ratio = s_n^2/(sigma2_ref n)``
    along them; ``t_slope``/``t_const`` fit ``t_n^2 ~ c n^slope`` over the
    upper half (on a log scale) of those points; ``t_slope_long`` is the same
    fit against the number of I-indices up to ``n`` instead of ``n`` itself
    (the two agree only once the J-share of indices has died out, which for
    ``beta`` close to ``alpha`` takes astronomically long); ``t_log_ratio`` is
    ``t_n^2 log n / s_n^2``; jumps are the largest one-step ladder increments.
    """

    n: np.ndarray
    s_ratio: np.ndarray
    t_slope: float
    t_const: float
    t_slope_long: float
    t_log_ratio: np.ndarray
    max_s_jump: float
    max_t_jump: float
    sigma2_ref: float
    gamma: float


def verify_scaling(ladder: VarianceLadder, params: SplitParams, sigma2_ref: float) -> ScalingReport:
    """Check ``s_n^2 ~ sigma^2 n`` and the growth exponent of ``t_n^2``."""
    layout = ladder.layout
    if layout.complete_pairs() < 10:
        raise DataError("scaling checks need at least 10 complete block pairs")
    if not sigma2_ref > 0:
        raise ConfigError("sigma2_ref must be positive")
    mask = layout.is_long & layout.complete
    ends = layout.end[mask]
    s = ladder.s2[ends - 1]
    t = ladder.t2[ends - 1]
    logn = np.log(ends.astype(np.float64))
    upper = logn >= 0.5 * (logn[0] + logn[-1])
    if upper.sum() < 3:
        upper = np.ones_like(upper)
    logt = np.log(np.maximum(t[upper], 1e-300))
    slope, icpt = np.polyfit(logn[upper], logt, 1)
    long_count = np.cumsum(layout.lengths * layout.is_long)[mask]
    slope_long = np.polyfit(np.log(long_count[upper].astype(np.float64)), logt, 1)[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t_log = np.where(s > 0, t * logn / s, np.nan)
    return ScalingReport(
        n=ends,
        s_ratio=s / (sigma2_ref * ends),
        t_slope=float(slope),
        t_const=float(math.exp(icpt)),
        t_slope_long=float(slope_long),
        t_log_ratio=t_log,
        max_s_jump=float(np.max(np.diff(ladder.s2, prepend=0.0))),
        max_t_jump=float(np.max(np.diff(ladder.t2, prepend=0.0))),
        sigma2_ref=float(sigma2_ref),
        gamma=params.gamma,
    )


def cross_group_correlation(spec: ProcessSpec, layout: BlockLayout, reps: int, seed: int) -> float:
    """Correlation between the normalised I-group and J-group partial sums.

    Each replication gives ``U = sum_{I-blocks} Y / s`` and
    ``V = sum_{J-blocks} Y / t`` over the whole layout; the result is the
    sample correlation of ``(U, V)`` across replications (normalisation does
    not change a correlation but keeps the surrogate explicit).
    """
    if reps < 100:
        raise ConfigError("cross_group_correlation needs reps >= 100")
    n = layout.n
    long_mask = np.repeat(layout.is_long, layout.lengths)
    s_n = math.sqrt(float(long_mask.sum()))
    t_n = math.sqrt(float((~long_mask).sum()))
    u = np.empty(reps)
    v = np.empty(reps)
    size = min(_CHUNK, batch_rows(spec, n))
    pos = c = 0
    while pos < reps:
        rows = min(size, reps - pos)
        y, _ = simulate_batch(spec, n, rows, child_seed(seed, c))
        u[pos:pos + rows] = y[:, long_mask].sum(axis=1) / s_n
        v[pos:pos + rows] = y[:, ~long_mask].sum(axis=1) / t_n
        pos += rows
        c += 1
    r = float(np.corrcoef(u, v)[0, 1])
    return min(1.0, max(-1.0, r))
