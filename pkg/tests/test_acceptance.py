"""Acceptance criteria 1-11.

Every criterion records one PASS/FAIL line (printed in the terminal summary)
and then asserts.  Seeds follow the fixed rule ``1000 + criterion number`` and
are disjoint from the pilot seeds in ``tests/reference/pilot.json``.
"""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from acceptance_log import record
from splitinv.blocking import (build_layout, cross_group_correlation, derive_params,
                               exact_ladder, verify_scaling)
from splitinv.changepoint import (UIConfig, consistency_drift, epidemic_test, kuiper_quantile,
                                  power_curve, simulate_null_reference, ui_statistic)
from splitinv.cli import main as cli_main
from splitinv.dependence import (check_power_inequality, estimate_delta, long_run_variance,
                                 moment_growth)
from splitinv.increments import WindowRule, increment_statistic, increment_study, window_max
from splitinv.mc_engine import child_seed
from splitinv.processes import Linear, MDep, ProcessSpec, generate, theoretical_sigma2

PILOT = json.loads((Path(__file__).parent / "reference" / "pilot.json").read_text())
IID = ProcessSpec(MDep(0, (1.0,)))
LIN2 = ProcessSpec(Linear("exponential", rho=0.5))
LINC = ProcessSpec(Linear("exponential", rho=0.5, causal=True))


def seed_for(criterion: int) -> int:
    return 1000 + criterion


def finish(number, passed, detail, started, limit=None):
    elapsed = time.perf_counter() - started
    if limit is not None and elapsed > limit:
        passed = False
        detail += f"; runtime {elapsed:.1f}s exceeds {limit:.0f}s"
    else:
        detail += f"; {elapsed:.1f}s"
    record(number, passed, detail)
    assert passed, detail


@pytest.fixture(scope="module")
def size_table():
    return simulate_null_reference(0.25, grid=4096, reps=10_000, seed=seed_for(7))


def test_criterion_01_closed_form_delta():
    t0 = time.perf_counter()
    rho, parts, ok = 0.5, [], True
    for m in (2, 4, 8):
        exact = math.sqrt(2 * rho ** (2 * (m // 2 + 1)) / (1 - rho ** 2))
        est = estimate_delta(LIN2, m, 2.0, 100_000, child_seed(seed_for(1), m))
        z = (est.value - exact) / est.std_error
        ok &= abs(z) <= 3
        parts.append(f"m={m}: {est.value:.5f} vs {exact:.5f} (z={z:+.2f})")
    finish(1, ok, "closed-form delta(m) " + ", ".join(parts), t0, 60)


def test_criterion_02_long_run_variance():
    t0 = time.perf_counter()
    target = theoretical_sigma2(LINC)
    v = long_run_variance(generate(LINC, 100_000, seed_for(2)))
    ok = target == pytest.approx(4.0) and abs(v / target - 1) <= 0.10
    finish(2, ok, f"Bartlett long-run variance {v:.4f} vs {target:.4f} (tolerance 10%)", t0, 10)


def test_criterion_03_moment_growth():
    t0 = time.perf_counter()
    grid = [100, 1000, 10_000]
    ok, parts = True, []
    p2 = moment_growth(IID, 2.0, grid, 10_000, child_seed(seed_for(3), 2))
    p4 = moment_growth(IID, 4.0, grid, 10_000, child_seed(seed_for(3), 4))
    for target, pts in ((1.0, p2), (3.0, p4)):
        for pt in pts:
            ok &= abs(pt.ratio - target) <= 3 * pt.std_error
        parts.append(f"iid target {target:g}: " + "/".join(f"{pt.ratio:.3f}" for pt in pts))
    lin = moment_growth(LINC, 4.0, grid, 4000, child_seed(seed_for(3), 5))
    slope = np.polyfit(np.log(grid), np.log([pt.ratio for pt in lin]), 1)[0]
    ok &= abs(slope) <= 0.1
    parts.append(f"linear p=4 log-ratio slope {slope:+.4f}")
    finish(3, ok, "moment ratios " + "; ".join(parts), t0, 300)


def test_criterion_04_block_scaling():
    t0 = time.perf_counter()
    q = derive_params(6, 1, 0.1)
    exact = (abs(q.alpha - 0.9) < 1e-12 and abs(q.beta - 0.81) < 1e-12
             and abs(q.delta - 0.426316) < 1e-6 and abs(q.gamma - 0.952632) < 1e-6)
    rep = verify_scaling(exact_ladder(build_layout(1_000_000, q), 1.0), q, 1.0)
    target = (1 + q.beta) / (1 + q.alpha)
    ok = exact and abs(rep.t_slope - target) <= 0.01
    detail = (f"params exact={exact}; t_n^2 slope vs n {rep.t_slope:.4f} vs target {target:.4f}"
              f" (|diff| {abs(rep.t_slope - target):.4f}, tolerance 0.01);"
              f" slope vs I-index count {rep.t_slope_long:.4f}")
    finish(4, ok, detail, t0, 60)


def test_criterion_05_cross_group_correlation():
    t0 = time.perf_counter()
    layout = build_layout(100_000, derive_params(6, 1, 0.1))
    r = cross_group_correlation(LIN2, layout, 200, seed_for(5))
    finish(5, abs(r) <= 0.1, f"I/J group correlation {r:+.4f} (bound 0.1)", t0, 300)


def test_criterion_06_kuiper():
    t0 = time.perf_counter()
    table = simulate_null_reference(0.0, grid=4096, reps=20_000, seed=seed_for(6))
    ok, parts = True, []
    for q in (0.90, 0.95):
        mc, series = table.quantile(q)[0], kuiper_quantile(q)
        ok &= abs(mc - series) <= 0.02
        parts.append(f"q={q}: {mc:.4f} vs {series:.4f}")
    finish(6, ok, "alpha=0 null quantiles vs Kuiper series " + ", ".join(parts), t0, 600)


def test_criterion_07_size(size_table):
    t0 = time.perf_counter()
    (pt,) = power_curve(IID, 2000, UIConfig(0.25, 0.05), size_table, [0.0], 400, 1000,
                        child_seed(seed_for(7), 1))
    ok = 0.03 <= pt.power <= 0.08
    finish(7, ok, f"rejection rate under the null {pt.power:.3f} (band [0.03, 0.08])", t0, 900)


def test_criterion_08_power_trend(size_table):
    t0 = time.perf_counter()
    deltas = [0.25, 0.5, 1.0]
    curve = power_curve(IID, 2000, UIConfig(0.25, 0.05), size_table, deltas, 400, 1000,
                        seed_for(8))
    increasing = []
    for a, b in zip(curve, curve[1:]):
        se = math.sqrt(a.std_error ** 2 + b.std_error ** 2)
        increasing.append(b.power - a.power > 2 * se)
    threshold = PILOT["power"]["threshold"]["1.0"]
    ok = all(increasing) and curve[-1].power >= threshold
    detail = ("power " + ", ".join(f"D={p.delta}: {p.power:.3f} (drift {p.drift:.2f})" for p in curve)
              + f"; strict increases by >2 SE: {increasing}; D=1.0 threshold {threshold:.3f}")
    finish(8, ok, detail, t0)


def test_criterion_09_increments_band():
    t0 = time.perf_counter()
    rep = increment_study(IID, 100_000, WindowRule("power", rho=0.6), 20, seed_for(9), sigma=1.0)
    v = rep.values[:, 0]
    lo, hi = PILOT["increments"]["band"]
    inside = int(np.sum((v >= lo) & (v <= hi)))
    finish(9, inside >= 18, f"{inside}/20 statistics in [{lo}, {hi}] (need 18);"
           f" range {v.min():.3f}..{v.max():.3f}", t0, 300)


def _brute_ui(x, alpha):
    n = x.shape[0]
    s = np.concatenate([[0.0], np.cumsum(x)])
    i, j = np.triu_indices(n + 1, 1)
    keep = (i >= 1) & (j - i < n)
    i, j = i[keep], j[keep]
    d = (j - i) / n
    v = np.abs(s[j] - s[i] - (j - i) * s[n] / n) / (d * (1 - d)) ** alpha / math.sqrt(n)
    return float(v.max())


def _brute_window(x, a):
    n = x.shape[0]
    s = np.concatenate([[0.0], np.cumsum(x)])
    k = np.arange(1, n - a + 1)[:, None]
    ell = np.arange(1, a + 1)[None, :]
    return float(np.abs(s[k + ell] - s[k]).max())


def test_criterion_10_exact_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed_for(10))
    ui_bad = win_bad = 0
    for _ in range(500):
        n = int(rng.integers(2, 301))
        x = rng.standard_normal(n)
        alpha = float(rng.uniform(0, 0.49))
        if abs(ui_statistic(x, alpha).value - _brute_ui(x, alpha)) > 1e-12 * max(1.0, _brute_ui(x, alpha)):
            ui_bad += 1
        m = int(rng.integers(3, 201))
        y = rng.standard_normal(m)
        a = int(rng.integers(1, m))
        if abs(window_max(y, a).value - _brute_window(y, a)) > 1e-12 * max(1.0, _brute_window(y, a)):
            win_bad += 1

    a = rng.uniform(-10, 10, 100_000)
    b = rng.uniform(-10, 10, 100_000)
    p = rng.uniform(1, 8, 100_000)
    violations = sum(not check_power_inequality(a[k], b[k], float(p[k])) for k in range(p.shape[0]))

    inv_bad = 0
    table = simulate_null_reference(0.25, grid=256, reps=1000, seed=seed_for(10))
    rule = WindowRule("power", rho=0.6)
    for _ in range(100):
        x = rng.standard_normal(int(rng.integers(30, 300)))
        c, shift = float(np.exp(rng.uniform(-5, 5))), float(rng.uniform(-50, 50))
        u, v = ui_statistic(x, 0.3), ui_statistic(c * x + shift, 0.3)
        inv_bad += not (abs(v.value - c * u.value) <= 1e-10 * c * u.value and (u.i, u.j) == (v.i, v.j))
        lv, lw = long_run_variance(x), long_run_variance(c * x + shift)
        inv_bad += not abs(lw - c * c * lv) <= 1e-10 * c * c * lv
        t1, t2 = epidemic_test(x, UIConfig(0.25), table), epidemic_test(c * x, UIConfig(0.25), table)
        inv_bad += not (abs(t1.statistic - t2.statistic) <= 1e-10 * t1.statistic
                        and (t1.interval, t1.reject) == (t2.interval, t2.reject))
        s1, s2 = increment_statistic(x, rule, 1.0), increment_statistic(c * x, rule, c)
        inv_bad += not abs(s1 - s2) <= 1e-10 * s1
        # power-of-two scaling is exact in binary floating point
        inv_bad += ui_statistic(4.0 * x, 0.3).value != 4.0 * u.value
        inv_bad += long_run_variance(4.0 * x) != 16.0 * lv

    ok = ui_bad == 0 and win_bad == 0 and violations == 0 and inv_bad == 0
    finish(10, ok, f"UI brute-force mismatches {ui_bad}/500, window_max mismatches {win_bad}/500,"
           f" power-inequality violations {violations}/100000, invariance failures {inv_bad}"
           " (shift/scale to 1e-10 relative, power-of-two scaling bitwise)", t0)


def test_criterion_11_reproducibility(tmp_path):
    t0 = time.perf_counter()
    seed = str(seed_for(11))
    series = tmp_path / "input.txt"
    assert cli_main(["simulate", "--kind", "linear", "--rho", "0.5", "--n", "600",
                     "--seed", seed, "--output", str(series), "--report", str(tmp_path / "s.json")]) == 0
    table_flags = ["--grid", "256", "--table-reps", "1000", "--table-seed", seed]
    commands = {
        "simulate": ["simulate", "--kind", "aug-garch", "--omega", "0.1", "--alpha1", "0.1",
                     "--beta1", "0.8", "--n", "500", "--epidemic", "100,200,1.5", "--output", "{out}"],
        "depcheck": ["depcheck", "--kind", "recurrence", "--phi", "0.5", "--reps", "500",
                     "--m-grid", "2,4,8", "--series", str(series)],
        "blocks": ["blocks", "--p", "6", "--eta", "1", "--eps0", "0.1", "--n", "3000",
                   "--kind", "linear", "--rho", "0.5", "--reps", "200", "--perturbed",
                   "--correlation"],
        "increments": ["increments", "--kind", "mdep", "--n", "2000", "--reps", "16"],
        "critvals": ["critvals", "--grid", "512", "--reps", "1000", "--sensitivity",
                     "--output", "{out}"],
        "detect": ["detect", "--series", str(series)] + table_flags,
        "power": ["power", "--kind", "recurrence", "--phi", "0.3", "--n", "300", "--ell", "60",
                  "--reps", "200", "--deltas", "0,0.5"] + table_flags,
    }
    bad = []
    for name, argv in commands.items():
        # identical flags, so identical file paths; bytes are captured between runs
        out, rep, plot = (tmp_path / f"{name}.{ext}" for ext in ("out", "json", "plot"))
        args = [a.replace("{out}", str(out)) for a in argv]
        outputs = []
        for workers in ("1", "1", "8"):
            for f in (out, rep, plot):
                f.unlink(missing_ok=True)
            code = cli_main(args + ["--seed", seed, "--workers", workers, "--report", str(rep),
                                    "--plot-data", str(plot)])
            outputs.append((code, [f.read_bytes() if f.exists() else None for f in (rep, plot, out)]))
        if outputs[0][0] != 0 or any(o != outputs[0] for o in outputs[1:]):
            bad.append(name)
    finish(11, not bad, "7 commands x (workers 1, 1, 8): byte-identical reports for all"
           if not bad else f"differing or failing commands: {bad}", t0)


def test_drift_reference_values():
    # the consistency drift for (n, ell, alpha) = (2000, 400, 0.25) is 800^1.5 / 2000 * Delta
    drifts = [consistency_drift(2000, 400, d, 0.25) for d in (0.25, 0.5, 1.0)]
    assert drifts == pytest.approx([2.8284, 5.6569, 11.3137], abs=1e-4)
