"""Replication orchestration: seed derivation, parallel map, quantiles, reports.

Seeds
-----
``child_seed(root, i)`` is ``mix64(mix64(root ^ ROOT_SALT) + (i + 1) * GOLDEN)``
where ``mix64`` is the SplitMix64 finaliser (constants ``0xBF58476D1CE4E5B9``,
``0x94D049BB133111EB``, shifts 30/27/31) and ``GOLDEN = 0x9E3779B97F4A7C15``.
For a fixed root the map ``i -> child_seed(root, i)`` is a bijection on 64-bit
integers, so distinct stream ids never collide.

Counter streams (:func:`counter_uniforms`) use the same construction: the
``t``-th uniform of key ``k`` is the SplitMix64 output ``mix64(k + (t+1)*GOLDEN)``
mapped to the open interval (0, 1).  They are vectorised over keys, which is
what makes the per-index auxiliary streams of the Wu coupling affordable.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy import stats

from . import __version__

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
ROOT_SALT = 0x6A09E667F3BCC909
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

_U_GOLDEN = np.uint64(GOLDEN)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_U_SALT = np.uint64(ROOT_SALT)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _U_M1
        z = (z ^ (z >> np.uint64(27))) * _U_M2
    return z ^ (z >> np.uint64(31))


def child_seed(root: int, stream_id: int) -> int:
    """Derive the 64-bit seed of stream ``stream_id`` under ``root``."""
    base = mix64((int(root) & MASK64) ^ ROOT_SALT)
    return mix64(base + ((int(stream_id) + 1) * GOLDEN & MASK64))


def child_seeds(root, stream_ids) -> np.ndarray:
    """Vectorised :func:`child_seed`; ``root`` may be a scalar or an array."""
    root = np.asarray(root, dtype=np.uint64)
    ids = np.asarray(stream_ids, dtype=np.uint64)
    base = mix64_array(root ^ _U_SALT)
    with np.errstate(over="ignore"):
        mixed = base + (ids + np.uint64(1)) * _U_GOLDEN
    return mix64_array(mixed)


def counter_uniforms(keys, count: int, offset: int = 0) -> np.ndarray:
    """Return a ``(len(keys), count)`` array of uniforms on (0, 1)."""
    keys = np.asarray(keys, dtype=np.uint64).reshape(-1, 1)
    t = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = mix64_array(keys + t[None, :] * _U_GOLDEN)
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed) & MASK64)


def map_replications(fn: Callable[[int, int], Any], root_seed: int, reps: int,
                     parallelism: int = 1) -> list:
    """Call ``fn(index, child_seed(root_seed, index))`` for every replication.

    Results come back in index order whatever the parallelism, so any
    reduction over them is independent of the thread count.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if parallelism < 1:
        raise ValueError("parallelism must be at least 1")
    seeds = [child_seed(root_seed, i) for i in range(reps)]

    def call(i):
        try:
            return fn(i, seeds[i])
        except Exception as exc:
            raise ReplicationError(i, exc) from exc

    if parallelism == 1:
        return [call(i) for i in range(reps)]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(call, range(reps)))


class ReplicationError(RuntimeError):
    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"replication {index} failed: {cause}")
        self.index = index
        self.cause = cause


def empirical_quantile(samples: Sequence[float], q: float, level: float = 0.95):
    """Order-statistic quantile with a distribution-free confidence interval.

    The estimate is the order statistic with (1-based) index ``ceil(q * N)``;
    there is no interpolation.  ``(ci_lo, ci_hi)`` are the order statistics
    ``X_(l)`` and ``X_(u)`` with ``l``/``u`` taken from Binomial(N, q)
    quantiles, so ``P(X_(l) <= xi_q < X_(u)) >= level``.
    """
    x = np.asarray(samples, dtype=np.float64)
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")
    idx = min(n, max(1, math.ceil(round(q * n, 9))))
    tail = (1.0 - level) / 2.0
    lo = int(stats.binom.ppf(tail, n, q))
    hi = int(stats.binom.ppf(1.0 - tail, n, q)) + 1
    lo = min(n, max(1, lo))
    hi = min(n, max(1, hi))
    return float(x[idx - 1]), float(x[lo - 1]), float(x[hi - 1])


def tree_sum(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Fixed-order pairwise sum (numpy's contiguous reduction is pairwise)."""
    return np.add.reduce(np.ascontiguousarray(values), axis=axis)


@dataclass
class ExperimentConfig:
    """A replicated experiment.

    ``payload(seed)`` runs one replication and returns a float or a 1-d array
    of floats; ``labels`` names the returned components.
    """

    payload: Callable[[int], Any]
    reps: int
    root_seed: int = 0
    parallelism: int = 1
    name: str = "experiment"
    labels: Sequence[str] | None = None
    params: dict = field(default_factory=dict)
    quantiles: Sequence[float] = (0.05, 0.5, 0.95)
    keep_values: bool = True


@dataclass
class Report:
    name: str
    labels: list
    mean: np.ndarray
    std_error: np.ndarray
    quantiles: dict
    values: np.ndarray | None
    config: dict

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "labels": list(self.labels),
            "mean": [float(v) for v in self.mean],
            "std_error": [float(v) for v in self.std_error],
            "quantiles": {
                lab: {str(q): list(ci) for q, ci in qs.items()}
                for lab, qs in self.quantiles.items()
            },
            "config": self.config,
        }
        if self.values is not None:
            out["values"] = self.values.tolist()
        return out


def summarize(values: np.ndarray, labels: Sequence[str], quantiles: Sequence[float]):
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    n = values.shape[0]
    mean = tree_sum(values) / n
    if n > 1:
        var = tree_sum((values - mean) ** 2) / (n - 1)
        se = np.sqrt(var / n)
    else:
        se = np.zeros_like(mean)
    qs = {}
    for c, lab in enumerate(labels):
        col = np.sort(values[:, c])
        qs[lab] = {q: empirical_quantile(col, q) for q in quantiles}
    return mean, se, qs


def run(config: ExperimentConfig) -> Report:
    """Execute ``config.reps`` replications and aggregate in index order."""
    if config.reps < 1:
        raise ValueError("reps must be at least 1")
    results = map_replications(lambda i, s: config.payload(s), config.root_seed,
                               config.reps, config.parallelism)
    values = np.array([np.atleast_1d(np.asarray(r, dtype=np.float64)) for r in results])
    k = values.shape[1]
    labels = list(config.labels) if config.labels else [f"v{c}" for c in range(k)]
    if len(labels) != k:
        raise ValueError("labels do not match the payload output width")
    mean, se, qs = summarize(values, labels, config.quantiles)
    echo = {
        "name": config.name,
        "reps": config.reps,
        "root_seed": config.root_seed,
        "params": config.params,
        "version": __version__,
    }
    return Report(config.name, labels, mean, se, qs,
                  values if config.keep_values else None, echo)
