"""Compare the compiled and pure-numpy scan kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Prints one line per (kernel, size, backend) with the best wall time and the
speed-up of the compiled backend.  Results of both backends are checked for
equality on the way.
"""
import argparse
import time

import numpy as np

from splitinv.changepoint import span_weights
from splitinv.kernels import available_backends


def best_time(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(rng):
    for n in (2000, 8000):
        x = rng.standard_normal(n)
        s = np.cumsum(x)
        b = s - np.arange(1, n + 1) / n * s[-1]
        w = span_weights(n, 0.25)[:n].copy()
        yield f"weighted_pair_max n={n} alpha=0.25", lambda m, b=b, w=w: m.weighted_pair_max(b, w)
        w0 = span_weights(n, 0.45)[:n].copy()
        yield f"weighted_pair_max n={n} alpha=0.45", lambda m, b=b, w=w0: m.weighted_pair_max(b, w)
    for n, a in ((10**5, 1000), (10**5, 4000)):
        s = np.concatenate([[0.0], np.cumsum(rng.standard_normal(n))])
        yield f"window_max n={n} a={a}", lambda m, s=s, a=a: m.window_max(s, a)
    e = rng.standard_normal((256, 2000))
    s0 = np.ones(256)
    yield "garch_sigma2 256x2000", lambda m: m.garch_sigma2(e, 0.1, 0.1, 0.8, s0)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = available_backends()
    if "cython" not in backends:
        print("compiled backend not built; only the python backend is available")
    rng = np.random.default_rng(12345)
    for name, call in cases(rng):
        times, outs = {}, {}
        for label, mod in backends.items():
            times[label], outs[label] = best_time(lambda: call(mod), args.repeat)
        ref = outs["python"]
        for label, out in outs.items():
            same = np.array_equal(np.asarray(out), np.asarray(ref)) if isinstance(out, np.ndarray) \
                else out == ref
            if not same:
                raise SystemExit(f"{name}: backend {label} disagrees with python")
        line = "  ".join(f"{k}={v * 1e3:9.2f} ms" for k, v in times.items())
        speed = f"  speed-up x{times['python'] / times['cython']:.1f}" if "cython" in times else ""
        print(f"{name:40s} {line}{speed}")


if __name__ == "__main__":
    main()
