"""Pilot Monte Carlo runs behind the calibrated acceptance bands.

    python3 scripts/pilot.py            # writes tests/reference/pilot.json

The pilot uses seeds disjoint from the acceptance runs.  Power thresholds are
the pilot power minus three binomial standard errors; the increments entry
records the pilot in-band frequency of the statistic.
"""
import json
import math
from pathlib import Path

import numpy as np

from splitinv.changepoint import UIConfig, power_curve, simulate_null_reference
from splitinv.increments import WindowRule, increment_study
from splitinv.processes import MDep, ProcessSpec

OUT = Path(__file__).resolve().parents[1] / "tests" / "reference" / "pilot.json"
IID = ProcessSpec(MDep(0, (1.0,)))


def power_pilot():
    table = simulate_null_reference(0.25, 4096, 4000, seed=9101)
    cfg = UIConfig(0.25, 0.05)
    deltas = [0.25, 0.5, 1.0]
    curve = power_curve(IID, 2000, cfg, table, deltas, 400, 1000, seed=9102)
    return {
        "n": 2000, "alpha": 0.25, "level": 0.05, "ell": 400, "reps": 1000,
        "table": {"grid": 4096, "reps": 4000, "seed": 9101}, "seed": 9102,
        "power": {str(p.delta): p.power for p in curve},
        "std_error": {str(p.delta): p.std_error for p in curve},
        "threshold": {str(p.delta): p.power - 3 * p.std_error for p in curve},
    }


def increments_pilot():
    rule = WindowRule("power", rho=0.6)
    rep = increment_study(IID, 100_000, rule, 400, seed=9201, sigma=1.0)
    v = rep.values[:, 0]
    inside = float(np.mean((v >= 0.8) & (v <= 1.15)))
    return {
        "n": 100_000, "rho": 0.6, "reps": 400, "seed": 9201, "band": [0.8, 1.15],
        "in_band_rate": inside,
        "in_band_se": math.sqrt(inside * (1 - inside) / v.size),
        "quantiles": {str(q): float(np.quantile(v, q)) for q in (0.025, 0.05, 0.5, 0.95, 0.975)},
    }


def main():
    doc = {"power": power_pilot(), "increments": increments_pilot()}
    OUT.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(json.dumps(doc, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
