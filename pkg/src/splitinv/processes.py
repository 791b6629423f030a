"""Stationary example processes and their coupled m-dependent approximations.

Every process is driven by i.i.d. innovations.  ``generate`` draws a path and
``generate_coupled`` additionally returns ``Y_k^(m)``, built on the same
innovations, such that approximations at indices more than ``m`` apart are
independent by construction:

* ``MDep``           ``Y^(m) = 0`` for ``m < window`` and ``Y^(m) = Y`` otherwise.
* ``Linear``         truncation of the filter to lags ``|j| <= m // 2``.
* ``Recurrence``,    Wu coupling: innovations older than ``k - m`` are replaced
  ``AugGarch``       by an auxiliary stream owned by index ``k``.
* ``ErgodicDoubling`` binary digits beyond position ``m`` are replaced by
                     auxiliary digits owned by index ``k``.
* ``LinearDependent`` truncated outer filter applied to the coupled inner
                     process (see :func:`_linear_dependent`).

Auxiliary streams are counter-based (:func:`splitinv.mc_engine.counter_uniforms`)
and keyed by ``(root seed, replication row, index k)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import signal, special

from .errors import ConfigError, StationarityError
from .mc_engine import child_seed, child_seeds, counter_uniforms, rng_for

DISTRIBUTIONS = ("normal", "rademacher", "uniform-bit", "student-t")
ERGODIC_FUNCS = ("cos", "sin", "tent")
AUX_STREAM = 0xA0
_COEF_TOL = 1e-13
_POLY_TAIL_TOL = 1e-8
_POLY_MAX_LAG = 10_000
_DIRECT_TAPS = 256
_CHUNK_ELEMS = 1 << 22


@dataclass(frozen=True)
class InnovationSpec:
    distribution: str = "normal"
    df: float | None = None

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ConfigError(f"unknown innovation distribution {self.distribution!r}")
        if self.distribution == "student-t":
            if self.df is None or not self.df > 2:
                raise ConfigError("student-t innovations need df > 2")

    @property
    def mean(self) -> float:
        return 0.5 if self.distribution == "uniform-bit" else 0.0

    @property
    def variance(self) -> float:
        return 0.25 if self.distribution == "uniform-bit" else 1.0

    def draw(self, rng: np.random.Generator, shape) -> np.ndarray:
        d = self.distribution
        if d == "normal":
            return rng.standard_normal(shape)
        if d == "rademacher":
            return 2.0 * rng.integers(0, 2, size=shape).astype(np.float64) - 1.0
        if d == "uniform-bit":
            return rng.integers(0, 2, size=shape).astype(np.float64)
        df = float(self.df)
        return rng.standard_t(df, size=shape) * math.sqrt((df - 2.0) / df)

    def from_uniform(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms on (0, 1) to innovations by inversion."""
        d = self.distribution
        if d == "normal":
            return special.ndtri(u)
        if d == "rademacher":
            return np.where(u < 0.5, -1.0, 1.0)
        if d == "uniform-bit":
            return np.where(u < 0.5, 0.0, 1.0)
        df = float(self.df)
        return special.stdtrit(df, u) * math.sqrt((df - 2.0) / df)


@dataclass(frozen=True)
class MDep:
    """Finite moving average ``Y_k = sum_{j<=window} weights[j] eps_{k-j}``."""

    window: int
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.window < 0 or len(self.weights) != self.window + 1:
            raise ConfigError("MDep needs window >= 0 and window + 1 weights")


@dataclass(frozen=True)
class Linear:
    """Linear filter ``Y_k = sum_j a_j eps_{k-j}``.

    ``rule`` is ``"exponential"`` (``a_j = rho**|j|``), ``"polynomial"``
    (``a_0 = 1``, ``a_j = |j|**-(decay + 1)``) or ``"explicit"`` (``coeffs``
    lists ``a_0, a_1, ...`` when causal, otherwise an odd-length list centred
    on ``a_0``).  Infinite filters are cut at ``max_lag``; by default the cut
    leaves a coefficient tail below 1e-13 (exponential) or a summed tail below
    1e-8 (polynomial, capped at 10 000 lags).
    """

    rule: str = "exponential"
    rho: float | None = None
    decay: float | None = None
    coeffs: tuple | None = None
    causal: bool = False
    max_lag: int | None = None

    def __post_init__(self):
        if self.coeffs is not None:
            object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if self.rule == "exponential":
            if self.rho is None or not 0.0 < self.rho < 1.0:
                raise ConfigError("exponential coefficients need 0 < rho < 1")
        elif self.rule == "polynomial":
            if self.decay is None or not self.decay > 0.0:
                raise ConfigError("polynomial coefficients need decay exponent A > 0")
        elif self.rule == "explicit":
            if not self.coeffs:
                raise ConfigError("explicit coefficients need a non-empty list")
            if not self.causal and len(self.coeffs) % 2 == 0:
                raise ConfigError("two-sided explicit coefficients need odd length")
            if not all(math.isfinite(c) for c in self.coeffs):
                raise ConfigError("coefficients must be finite")
        else:
            raise ConfigError(f"unknown coefficient rule {self.rule!r}")
        if self.max_lag is not None and self.max_lag < 0:
            raise ConfigError("max_lag must be non-negative")

    def lag_range(self) -> int:
        if self.rule == "explicit":
            return len(self.coeffs) - 1 if self.causal else len(self.coeffs) // 2
        if self.max_lag is not None:
            return self.max_lag
        if self.rule == "exponential":
            return max(1, math.ceil(math.log(_COEF_TOL) / math.log(self.rho)))
        A = self.decay
        return int(min(_POLY_MAX_LAG, max(1, math.ceil((1.0 / (A * _POLY_TAIL_TOL)) ** (1.0 / A)))))

    def coefficients(self):
        """Return ``(lo, a)`` with ``a[i]`` the coefficient of lag ``lo + i``."""
        if self.rule == "explicit":
            a = np.array(self.coeffs, dtype=np.float64)
            return (0 if self.causal else -(len(a) // 2)), a
        J = self.lag_range()
        lags = np.arange(0 if self.causal else -J, J + 1)
        if self.rule == "exponential":
            a = self.rho ** np.abs(lags).astype(np.float64)
        else:
            a = np.ones(lags.shape, dtype=np.float64)
            nz = lags != 0
            a[nz] = np.abs(lags[nz]).astype(np.float64) ** -(self.decay + 1.0)
        return int(lags[0]), a


@dataclass(frozen=True)
class Recurrence:
    """Affine AR(1) recursion ``Y_k = phi Y_{k-1} + eps_k``."""

    phi: float
    burn_in: int = 1000

    def __post_init__(self):
        if not -1.0 < self.phi < 1.0:
            raise ConfigError("recurrence needs |phi| < 1")
        if self.burn_in < 1:
            raise ConfigError("burn_in must be positive")


@dataclass(frozen=True)
class AugGarch:
    """Augmented GARCH(1,1) with identity link: ``Y_k = sigma_k eps_k`` and
    ``sigma_k^2 = (beta1 + alpha1 eps_{k-1}^2) sigma_{k-1}^2 + omega``."""

    omega: float
    alpha1: float
    beta1: float
    burn_in: int = 1000

    def __post_init__(self):
        if not self.omega > 0 or self.alpha1 < 0 or self.beta1 < 0:
            raise ConfigError("augmented GARCH needs omega > 0, alpha1 >= 0, beta1 >= 0")
        if self.burn_in < 1:
            raise ConfigError("burn_in must be positive")


@dataclass(frozen=True)
class ErgodicDoubling:
    """``Y_k = f(2^k omega)`` with ``omega`` given by i.i.d. binary digits."""

    func: str = "cos"
    digit_depth: int = 64

    def __post_init__(self):
        if self.func not in ERGODIC_FUNCS:
            raise ConfigError(f"unknown periodic function {self.func!r}")
        if not 1 <= self.digit_depth <= 64:
            raise ConfigError("digit_depth must lie in [1, 64]")


@dataclass(frozen=True)
class LinearDependent:
    """Linear filter applied to another (dependent) process."""

    outer: Linear
    inner: "ProcessSpec"


Kind = Union[MDep, Linear, Recurrence, AugGarch, ErgodicDoubling, LinearDependent]


@dataclass(frozen=True)
class ProcessSpec:
    kind: Kind
    innovations: InnovationSpec = field(default_factory=InnovationSpec)

    def validate(self) -> "ProcessSpec":
        kind = self.kind
        dist = self.innovations.distribution
        if isinstance(kind, ErgodicDoubling):
            if dist not in ("uniform-bit", "rademacher"):
                raise ConfigError("ergodic doubling needs binary digits "
                                  "(uniform-bit or rademacher innovations)")
        elif isinstance(kind, LinearDependent):
            kind.inner.validate()
        elif dist == "uniform-bit":
            raise ConfigError("uniform-bit innovations are not centred; "
                              "use them only for ergodic doubling")
        if isinstance(kind, AugGarch):
            _garch_screen(kind, self.innovations)
        return self


@dataclass(frozen=True, eq=False)
class SamplePath:
    values: np.ndarray
    spec: ProcessSpec | None = None
    seed: int | None = None
    epidemic: tuple | None = None

    def __len__(self):
        return int(self.values.shape[0])


@dataclass(frozen=True, eq=False)
class CoupledPath:
    y: np.ndarray
    y_approx: np.ndarray
    m: int | np.ndarray
    seed: int
    aux_seed: int
    spec: ProcessSpec | None = None

    def __len__(self):
        return int(self.y.shape[0])


# ---------------------------------------------------------------- simulation
#
# Simulation runs in two phases.  ``_draw`` consumes the main generator and
# returns a state holding the path and its innovations.  ``_approx`` then builds
# ``Y_k^(m)`` for a contiguous index range ``[lo, hi)`` (0-based) and one
# window ``m``; per-index windows are handled by grouping equal values.  The
# main generator is never touched by ``_approx``, so paths agree between
# ``generate`` and ``generate_coupled``.


def _convolve_valid(e: np.ndarray, a: np.ndarray, n: int) -> np.ndarray:
    L = a.shape[0]
    taps = np.flatnonzero(a)
    if taps.size <= _DIRECT_TAPS:
        out = np.zeros((e.shape[0], n))
        for i in taps.tolist():
            out += a[i] * e[:, L - 1 - i:L - 1 - i + n]
        return out
    return signal.fftconvolve(e, a[None, :], mode="valid", axes=1)


def _truncate(lo: int, a: np.ndarray, h: int) -> np.ndarray:
    lags = np.arange(lo, lo + a.shape[0])
    return np.where(np.abs(lags) <= h, a, 0.0)


def _aux_keys(aux_root: int, rows: int, lo: int, hi: int) -> np.ndarray:
    row_keys = child_seeds(aux_root, np.arange(rows))
    return child_seeds(row_keys[:, None], np.arange(lo, hi)[None, :]).reshape(-1)


def _aux_reduce(aux_root, rows, lo, hi, count, innov, reducer) -> np.ndarray:
    """Apply ``reducer`` to blocks of ``count`` auxiliary innovations owned by
    each ``(row, k)`` with ``lo <= k < hi``, in memory-bounded chunks.
    Returns shape ``(rows, hi - lo)``."""
    keys = _aux_keys(aux_root, rows, lo, hi)
    out = np.empty(keys.shape[0])
    step = max(1, _CHUNK_ELEMS // max(count, 1))
    for s in range(0, keys.shape[0], step):
        eta = innov.from_uniform(counter_uniforms(keys[s:s + step], count))
        out[s:s + step] = reducer(eta)
    return out.reshape(rows, hi - lo)


@lru_cache(maxsize=64)
def _garch_screen(kind: AugGarch, innov: InnovationSpec) -> float:
    eps = innov.draw(np.random.default_rng(20100623), 200_000)
    with np.errstate(divide="ignore"):
        lyap = float(np.mean(np.log(kind.beta1 + kind.alpha1 * eps * eps)))
    if not lyap < 0.0:
        raise StationarityError(
            f"augmented GARCH fails the stationarity screen: E log c(eps) ~ {lyap:.4f} >= 0")
    return lyap


def _garch_start(kind: AugGarch, innov: InnovationSpec) -> float:
    denom = 1.0 - kind.beta1 - kind.alpha1 * innov.variance
    return kind.omega / denom if denom > 0 else kind.omega


def _ergodic_f(name: str, x: np.ndarray) -> np.ndarray:
    if name == "cos":
        return np.cos(2.0 * np.pi * x)
    if name == "sin":
        return np.sin(2.0 * np.pi * x)
    return 1.0 - 4.0 * np.abs(x - 0.5)


def _draw(spec: ProcessSpec, n: int, rng, rows: int) -> dict:
    kind, innov = spec.kind, spec.innovations
    if isinstance(kind, (Linear, MDep)):
        if isinstance(kind, Linear):
            lo, a = kind.coefficients()
        else:
            lo, a = 0, np.array(kind.weights)
        e = innov.draw(rng, (rows, n + a.shape[0] - 1))
        return {"y": _convolve_valid(e, a, n), "e": e, "lo": lo, "a": a}
    if isinstance(kind, Recurrence):
        e = innov.draw(rng, (rows, kind.burn_in + n))
        y = signal.lfilter([1.0], [1.0, -kind.phi], e, axis=1)[:, kind.burn_in:]
        return {"y": y, "e": e}
    if isinstance(kind, AugGarch):
        from .kernels import garch_sigma2

        e = innov.draw(rng, (rows, kind.burn_in + n))
        s0 = np.full(rows, _garch_start(kind, innov))
        sig2 = garch_sigma2(np.ascontiguousarray(e), kind.omega, kind.alpha1, kind.beta1, s0)
        return {"y": (np.sqrt(sig2) * e)[:, kind.burn_in:], "e": e}
    if isinstance(kind, ErgodicDoubling):
        D = kind.digit_depth
        bits = innov.draw(rng, (rows, n + D))
        if innov.distribution == "rademacher":
            bits = 0.5 * (bits + 1.0)
        scale = 0.5 ** np.arange(1, D + 1)
        x = np.zeros((rows, n))
        for j in range(1, D + 1):
            x += scale[j - 1] * bits[:, j:j + n]
        return {"y": _ergodic_f(kind.func, x), "bits": bits, "scale": scale}
    if isinstance(kind, LinearDependent):
        lo, a = kind.outer.coefficients()
        inner = _draw(kind.inner, n + a.shape[0] - 1, rng, rows)
        return {"y": _convolve_valid(inner["y"], a, n), "inner": inner, "lo": lo, "a": a}
    raise ConfigError(f"unsupported process kind {type(kind).__name__}")


def _approx(spec: ProcessSpec, st: dict, m: int, lo: int, hi: int, aux_root: int) -> np.ndarray:
    kind, innov = spec.kind, spec.innovations
    rows, w = st["y"].shape[0], hi - lo
    if isinstance(kind, MDep):
        return np.zeros((rows, w)) if m < kind.window else st["y"][:, lo:hi].copy()
    if isinstance(kind, Linear):
        a = st["a"]
        return _convolve_valid(st["e"][:, lo:hi + a.shape[0] - 1], _truncate(st["lo"], a, m // 2), w)
    if isinstance(kind, (Recurrence, AugGarch)):
        B, e = kind.burn_in, st["e"]
        if m > B:
            raise ConfigError(f"coupling window m={m} exceeds burn_in={B}")
        if isinstance(kind, Recurrence):
            phi = kind.phi
            powers = phi ** np.arange(B - 1, -1, -1, dtype=np.float64)
            x = _aux_reduce(aux_root, rows, lo, hi, B, innov, lambda eta: (eta * powers).sum(axis=-1))
            for s in range(m + 1):
                x = phi * x + e[:, B - m + s + lo:B - m + s + hi]
            return x
        from .kernels import garch_sigma2

        om, al, be = kind.omega, kind.alpha1, kind.beta1
        s0 = _garch_start(kind, innov)

        def stationary_var(eta):
            eta = np.ascontiguousarray(eta)
            last = garch_sigma2(eta, om, al, be, np.full(eta.shape[0], s0))[:, -1]
            return om + (be + al * eta[:, -1] ** 2) * last

        v = _aux_reduce(aux_root, rows, lo, hi, B, innov, stationary_var)
        for s in range(m):
            x = e[:, B - m + s + lo:B - m + s + hi]
            v = om + (be + al * x * x) * v
        return np.sqrt(v) * e[:, B + lo:B + hi]
    if isinstance(kind, ErgodicDoubling):
        D, bits, scale = kind.digit_depth, st["bits"], st["scale"]
        keep = min(m, D)
        xa = np.zeros((rows, w))
        for j in range(1, keep + 1):
            xa += scale[j - 1] * bits[:, j + lo:j + hi]
        if keep < D:
            tail = scale[keep:]
            digit = InnovationSpec("uniform-bit")
            xa += _aux_reduce(aux_root, rows, lo, hi, D - keep, digit, lambda eta: (eta * tail).sum(axis=-1))
        return _ergodic_f(kind.func, xa)
    if isinstance(kind, LinearDependent):
        # Outer truncation h = m // 4 over the inner process coupled at
        # m - span(h): index sets more than m apart then only touch inner
        # indices more than the inner window apart.
        a, h = st["a"], m // 4
        span = h if kind.outer.causal else 2 * h
        z = _approx(kind.inner, st["inner"], m - span, lo, hi + a.shape[0] - 1,
                    child_seed(aux_root, 1))
        return _convolve_valid(z, _truncate(st["lo"], a, h), w)
    raise ConfigError(f"unsupported process kind {type(kind).__name__}")


def _approx_schedule(spec, st, m, aux_root) -> np.ndarray:
    n = st["y"].shape[1]
    if np.ndim(m) == 0:
        return _approx(spec, st, int(m), 0, n, aux_root)
    out = np.empty_like(st["y"])
    for v in np.unique(m).tolist():
        idx = np.flatnonzero(m == v)
        lo, hi = int(idx[0]), int(idx[-1]) + 1
        out[:, idx] = _approx(spec, st, int(v), lo, hi, aux_root)[:, idx - lo]
    return out


def _check_window(m, n):
    if m is None:
        return None
    if np.ndim(m) == 0:
        if int(m) != m or m < 0:
            raise ConfigError("m must be a non-negative integer")
        return int(m)
    arr = np.asarray(m)
    if arr.shape != (n,):
        raise ConfigError(f"a per-index window schedule needs length n={n}")
    if arr.size and (arr.min() < 0 or not np.all(arr == np.floor(arr))):
        raise ConfigError("window schedule entries must be non-negative integers")
    return arr.astype(np.int64)


def simulate_batch(spec: ProcessSpec, n: int, rows: int, seed: int, m=None):
    """Draw ``rows`` independent paths of length ``n`` as a ``(rows, n)`` array.

    With ``m`` (an integer or a length-``n`` per-index schedule) the coupled
    approximations are returned too; otherwise the second item is None.
    Deterministic in all arguments.
    """
    spec.validate()
    if n < 1 or rows < 1:
        raise ConfigError("n and rows must be positive")
    m = _check_window(m, n)
    st = _draw(spec, n, rng_for(seed), rows)
    if m is None:
        return st["y"], None
    return st["y"], _approx_schedule(spec, st, m, child_seed(seed, AUX_STREAM))


def batch_rows(spec: ProcessSpec, n: int, budget: int = _CHUNK_ELEMS) -> int:
    """A row count keeping one simulated batch near ``budget`` numbers."""
    return max(1, budget // (n + _overhead(spec.kind)))


def _overhead(kind) -> int:
    if isinstance(kind, (Recurrence, AugGarch)):
        return kind.burn_in
    if isinstance(kind, Linear):
        return 2 * kind.lag_range() + 1
    if isinstance(kind, MDep):
        return kind.window + 1
    if isinstance(kind, ErgodicDoubling):
        return kind.digit_depth
    if isinstance(kind, LinearDependent):
        return 2 * kind.outer.lag_range() + 1 + _overhead(kind.inner.kind)
    return 0


# ---------------------------------------------------------------- public API


def generate(spec: ProcessSpec, n: int, seed: int) -> SamplePath:
    """Draw a stationary sample path ``Y_1..Y_n``."""
    if n < 1:
        raise ConfigError("n must be at least 1")
    y, _ = simulate_batch(spec, n, 1, seed)
    return SamplePath(y[0].copy(), spec, int(seed))


def generate_coupled(spec: ProcessSpec, n: int, m, seed: int) -> CoupledPath:
    """Draw ``Y_1..Y_n`` together with ``Y_k^(m)`` on shared innovations.

    ``m`` is a window or a length-``n`` sequence of per-index windows
    (``Y'_k = Y_k^(m_k)``).  ``y`` equals ``generate(spec, n, seed).values``.
    """
    if n < 1:
        raise ConfigError("n must be at least 1")
    y, ya = simulate_batch(spec, n, 1, seed, m=m)
    m = _check_window(m, n)
    return CoupledPath(y[0].copy(), ya[0].copy(), m, int(seed),
                       child_seed(seed, AUX_STREAM), spec)


def inject_epidemic(path: SamplePath, m1: int, m2: int, delta: float) -> SamplePath:
    """Shift ``X_{m1+1}, ..., X_{m2}`` (1-based) by ``delta``."""
    n = len(path)
    if not (1 <= m1 < m2 <= n):
        raise ConfigError(f"epidemic bounds need 1 <= m1 < m2 <= n, got m1={m1}, m2={m2}, n={n}")
    values = path.values.copy()
    if delta != 0.0:
        values[m1:m2] += delta
    return replace(path, values=values, epidemic=(int(m1), int(m2), float(delta)))


def theoretical_sigma2(spec: ProcessSpec) -> float | None:
    """Long-run variance for linear and finite moving-average specs, else None."""
    kind, v = spec.kind, spec.innovations.variance
    if isinstance(kind, MDep):
        return math.fsum(kind.weights) ** 2 * v
    if not isinstance(kind, Linear):
        return None
    if kind.rule == "explicit" or kind.max_lag is not None:
        _, a = kind.coefficients()
        return math.fsum(a) ** 2 * v
    if kind.rule == "exponential":
        r = kind.rho
        total = 1.0 / (1.0 - r) if kind.causal else 1.0 + 2.0 * r / (1.0 - r)
    else:
        z = float(special.zeta(kind.decay + 1.0))
        total = 1.0 + z if kind.causal else 1.0 + 2.0 * z
    return total ** 2 * v


def coupling_l2_error(spec: ProcessSpec, m: int) -> float | None:
    """Exact ``||Y_0 - Y_0^(m)||_2`` for linear and moving-average specs."""
    kind, v = spec.kind, spec.innovations.variance
    if isinstance(kind, MDep):
        return 0.0 if m >= kind.window else math.sqrt(v * math.fsum(w * w for w in kind.weights))
    if not isinstance(kind, Linear):
        return None
    lo, a = kind.coefficients()
    lags = np.arange(lo, lo + a.shape[0])
    tail = a[np.abs(lags) > m // 2]
    return math.sqrt(v * math.fsum((tail * tail).tolist()))


# ---------------------------------------------------------------- config I/O

_KIND_NAMES = {
    "mdep": MDep,
    "linear": Linear,
    "recurrence": Recurrence,
    "aug-garch": AugGarch,
    "ergodic-doubling": ErgodicDoubling,
    "linear-dependent": LinearDependent,
}


def _floats(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    return tuple(float(x) for x in str(text).replace(",", " ").split())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_inner(text: str) -> dict:
    """Parse ``"kind: key=value; key=value"`` into a mapping."""
    head, _, rest = str(text).partition(":")
    out = {"kind": head.strip()}
    for item in rest.split(";"):
        if item.strip():
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"malformed inner process entry {item!r}")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def spec_from_mapping(cfg: dict) -> ProcessSpec:
    """Build a ProcessSpec from flat string-valued settings (CLI / config file)."""
    cfg = {k.replace("-", "_"): v for k, v in cfg.items() if v is not None}
    name = str(cfg.get("kind", "")).strip()
    if name not in _KIND_NAMES:
        raise ConfigError(f"unknown process kind {name!r}; choose from {sorted(_KIND_NAMES)}")
    try:
        df = cfg.get("df")
        innov = InnovationSpec(str(cfg.get("innovations", "normal")),
                               float(df) if df is not None else None)
        if name == "mdep":
            weights = _floats(cfg.get("weights", "1"))
            kind = MDep(int(cfg.get("window", len(weights) - 1)), weights)
        elif name == "linear":
            kind = _linear_from(cfg)
        elif name == "recurrence":
            kind = Recurrence(float(cfg["phi"]), int(cfg.get("burn_in", 1000)))
        elif name == "aug-garch":
            kind = AugGarch(float(cfg["omega"]), float(cfg["alpha1"]), float(cfg["beta1"]),
                            int(cfg.get("burn_in", 1000)))
        elif name == "ergodic-doubling":
            kind = ErgodicDoubling(str(cfg.get("func", "cos")), int(cfg.get("digit_depth", 64)))
            if "innovations" not in cfg:
                innov = InnovationSpec("uniform-bit")
        else:
            if "inner" not in cfg:
                raise ConfigError("linear-dependent needs an inner process")
            inner = cfg["inner"]
            inner = spec_from_mapping(parse_inner(inner) if isinstance(inner, str) else inner)
            kind = LinearDependent(_linear_from(cfg), inner)
    except KeyError as exc:
        raise ConfigError(f"process kind {name!r} is missing setting {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad process setting: {exc}") from None
    return ProcessSpec(kind, innov).validate()


def _linear_from(cfg: dict) -> Linear:
    rule = str(cfg.get("rule", "exponential"))
    return Linear(
        rule=rule,
        rho=float(cfg["rho"]) if "rho" in cfg else None,
        decay=float(cfg["decay"]) if "decay" in cfg else None,
        coeffs=_floats(cfg["coeffs"]) if "coeffs" in cfg else None,
        causal=_bool(cfg.get("causal", False)),
        max_lag=int(cfg["max_lag"]) if "max_lag" in cfg else None,
    )


def spec_to_mapping(spec: ProcessSpec) -> dict:
    """Inverse of :func:`spec_from_mapping` (used to echo configurations)."""
    kind = spec.kind
    name = next(k for k, v in _KIND_NAMES.items() if isinstance(kind, v))
    out = {"kind": name, "innovations": spec.innovations.distribution}
    if spec.innovations.df is not None:
        out["df"] = spec.innovations.df
    if isinstance(kind, LinearDependent):
        out.update(_fields(kind.outer))
        out["inner"] = spec_to_mapping(kind.inner)
    else:
        out.update(_fields(kind))
    return out


def _fields(obj) -> dict:
    out = {}
    for f in fields(obj):
        v = getattr(obj, f.name)
        if v is None:
            continue
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out
