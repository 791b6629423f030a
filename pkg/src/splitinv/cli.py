"""Command-line interface.

Every command writes a JSON report (sorted keys, no timestamps) to ``--report``
or stdout, optionally a two-column plot-data file (``--plot-data``), and exits
with 0 on success, 2 on usage/configuration errors and 3 on data errors.
Test decisions are part of the report, never of the exit code.

Settings may come from an INI file (``--config``): keys in the ``[process]``
section and in the section named after the command mirror the long flags
(``burn-in = 500`` is ``--burn-in 500``); flags given on the command line win.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .blocking import (build_layout, cross_group_correlation, derive_params,
                       estimate_block_variances, exact_ladder, verify_scaling)
from .changepoint import (CriticalValueTable, UIConfig, admissible_alpha, epidemic_test,
                          grid_sensitivity, power_curve, simulate_null_reference)
from .dependence import estimate_delta, fit_rate, long_run_variance
from .errors import ConfigError, DataError, ExactMDependence
from .increments import WindowRule, increment_statistic, increment_study, window_length
from .mc_engine import ReplicationError
from .processes import (SamplePath, generate, inject_epidemic, spec_from_mapping, spec_to_mapping,
                        theoretical_sigma2)

PROCESS_FLAGS = ("kind", "innovations", "df", "rule", "rho", "decay", "coeffs", "causal",
                 "max-lag", "window", "weights", "phi", "burn-in", "omega", "alpha1", "beta1",
                 "func", "digit-depth", "inner")
_NOT_ECHOED = {"command", "config", "workers", "report", "plot_data"}


# ---------------------------------------------------------------- series files


def parse_series(path) -> SamplePath:
    """Read one value per line; a non-numeric first line is a header; blank
    lines are ignored.  Raises :class:`DataError` with the offending line."""
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read series file {path}: {exc}") from None
    values = []
    seen_content = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        try:
            v = float(line)
        except ValueError:
            if not seen_content:
                seen_content = True
                continue
            raise DataError(f"{path}: line {lineno} is not a number: {line!r}") from None
        seen_content = True
        if not math.isfinite(v):
            raise DataError(f"{path}: line {lineno} is not finite: {line!r}")
        values.append(v)
    if len(values) < 2:
        raise DataError(f"{path}: need at least 2 values, found {len(values)}")
    return SamplePath(np.array(values))


def write_series(path, values, header: str = "value") -> None:
    lines = [header] + [repr(float(v)) for v in values]
    Path(path).write_text("\n".join(lines) + "\n")


def write_plot_data(path, x, y, labels=("x", "y")) -> None:
    lines = [f"# {labels[0]} {labels[1]}"]
    lines += [f"{float(a)!r} {float(b)!r}" for a, b in zip(x, y)]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------- helpers


def _floats(text) -> list[float]:
    return [float(v) for v in str(text).replace(",", " ").split()]


def _ints(text) -> list[int]:
    out = []
    for v in str(text).replace(",", " ").split():
        f = float(v)
        if f != int(f):
            raise argparse.ArgumentTypeError(f"not an integer: {v}")
        out.append(int(f))
    return out


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text}")


def _seed(text) -> int:
    v = int(str(text), 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def _emit(args, result: dict) -> None:
    echo = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}
    doc = {"command": args.command, "version": __version__, "config": echo, "result": result}
    text = json.dumps(_clean(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)


def _spec(args):
    cfg = {}
    for flag in PROCESS_FLAGS:
        v = getattr(args, flag.replace("-", "_"), None)
        if v is not None:
            cfg[flag.replace("-", "_")] = v
    if "kind" not in cfg:
        raise ConfigError("a process kind is required (--kind)")
    return spec_from_mapping(cfg)


def _window_rule(args) -> WindowRule:
    if args.window_c is not None:
        return WindowRule("proportional", c=args.window_c)
    return WindowRule("power", rho=args.window_rho)


def _table(args, alpha: float) -> CriticalValueTable:
    if args.table:
        table = CriticalValueTable.load(args.table)
        if table.alpha != alpha:
            raise ConfigError(f"table alpha={table.alpha} does not match --alpha={alpha}")
        return table
    return simulate_null_reference(alpha, args.grid, args.table_reps, args.table_seed, args.workers)


# ---------------------------------------------------------------- commands


def cmd_simulate(args) -> dict:
    spec = _spec(args)
    path = generate(spec, args.n, args.seed)
    if args.epidemic:
        m1, m2, delta = args.epidemic
        path = inject_epidemic(path, int(m1), int(m2), delta)
    write_series(args.output, path.values)
    if args.plot_data:
        write_plot_data(args.plot_data, np.arange(1, args.n + 1), path.values, ("k", "value"))
    v = path.values
    return {"spec": spec_to_mapping(spec), "n": args.n, "output": args.output,
            "epidemic": path.epidemic, "mean": float(v.mean()), "variance": float(v.var()),
            "theoretical_sigma2": theoretical_sigma2(spec)}


def cmd_depcheck(args) -> dict:
    out = {}
    if args.series:
        path = parse_series(args.series)
        out["long_run_variance"] = long_run_variance(path, args.bandwidth)
        out["n"] = len(path)
    if args.kind is None:
        if not args.series:
            raise ConfigError("depcheck needs a process (--kind) or a series file (--series)")
        return out
    spec = _spec(args)
    points = [estimate_delta(spec, m, args.p, args.reps, args.seed) for m in args.m_grid]
    out["spec"] = spec_to_mapping(spec)
    out["delta"] = [{"m": pt.m, "value": pt.value, "std_error": pt.std_error} for pt in points]
    out["theoretical_sigma2"] = theoretical_sigma2(spec)
    try:
        fit = fit_rate(points)
    except ExactMDependence:
        out["rate"] = {"kind": "exact-m-dependence"}
    except DataError as exc:
        out["rate"] = {"kind": "undetermined", "reason": str(exc)}
    else:
        out["rate"] = {"kind": fit.kind, "exponent": fit.exponent, "scale": fit.scale,
                       "fit_quality": fit.fit_quality, "alternative_quality": fit.alternative_quality}
        if args.moment_p is not None:
            rng_ = admissible_alpha(fit, args.moment_p)
            out["admissible_alpha"] = {"eta_min": rng_.eta_min, "alpha_max": rng_.alpha_max,
                                       "admissible": rng_.admissible, "note": rng_.note}
    if args.plot_data:
        write_plot_data(args.plot_data, [pt.m for pt in points], [pt.value for pt in points],
                        ("m", "delta"))
    return out


def cmd_blocks(args) -> dict:
    params = derive_params(args.p, args.eta, args.eps0, args.eps1, args.mode)
    layout = build_layout(args.n, params, adjust=args.auto_eps1)
    params = layout.params
    if args.kind is not None:
        spec = _spec(args)
        ladder = estimate_block_variances(spec, layout, args.reps, args.seed, args.perturbed)
        ref = args.sigma2 if args.sigma2 is not None else theoretical_sigma2(spec)
        if ref is None:
            raise ConfigError("--sigma2 is required for specs without a closed-form long-run variance")
        corr = cross_group_correlation(spec, layout, args.reps, args.seed) if args.correlation else None
    else:
        ref = 1.0 if args.sigma2 is None else args.sigma2
        ladder = exact_ladder(layout, ref)
        corr = None
    rep = verify_scaling(ladder, params, ref)
    if args.plot_data:
        write_plot_data(args.plot_data, rep.n, ladder.t2[rep.n - 1], ("n", "t2"))
    return {
        "params": {"p": params.p, "eta": params.eta, "eps0": params.eps0, "eps1": params.eps1,
                   "A_min": params.A_min, "alpha": params.alpha, "beta": params.beta,
                   "delta": params.delta, "gamma": params.gamma, "mode": params.mode},
        "layout": {"n": layout.n, "blocks": len(layout.k), "complete_pairs": layout.complete_pairs(),
                   "final_block_partial": not bool(layout.complete[-1]),
                   "separation_ok": layout.separation_ok,
                   "first_blocks": layout.blocks[:10]},
        "ladder": {"s2_n": float(ladder.s2[-1]), "t2_n": float(ladder.t2[-1]),
                   "b2": ladder.b2, "h2": ladder.h2},
        "scaling": {"s_ratio_final": float(rep.s_ratio[-1]), "t_slope": rep.t_slope,
                    "t_slope_long": rep.t_slope_long, "t_const": rep.t_const,
                    "target_slope": (1 + params.beta) / (1 + params.alpha),
                    "t_log_ratio_final": float(rep.t_log_ratio[-1]),
                    "max_s_jump": rep.max_s_jump, "max_t_jump": rep.max_t_jump,
                    "sigma2_ref": ref},
        "cross_group_correlation": corr,
    }


def cmd_increments(args) -> dict:
    rule = _window_rule(args)
    if args.series:
        path = parse_series(args.series)
        sigma = args.sigma if args.sigma is not None else math.sqrt(long_run_variance(path))
        n = len(path)
        return {"n": n, "window": window_length(rule, n), "sigma": sigma,
                "statistic": increment_statistic(path, rule, sigma, args.coarse)}
    spec = _spec(args)
    report = increment_study(spec, args.n, rule, args.reps, args.seed, args.sigma,
                             args.workers, args.coarse)
    vals = report.values[:, 0]
    if args.plot_data:
        write_plot_data(args.plot_data, np.arange(len(vals)), vals, ("replication", "statistic"))
    return {"spec": spec_to_mapping(spec), "study": report.to_dict()}


def cmd_critvals(args) -> dict:
    if args.load:
        table = CriticalValueTable.load(args.load)
    else:
        table = simulate_null_reference(args.alpha, args.grid, args.reps, args.seed, args.workers)
        if args.output:
            table.save(args.output)
    qs = {str(q): list(table.quantile(q)) for q in args.quantiles}
    out = {"alpha": table.alpha, "grid": table.grid, "reps": table.reps, "seed": table.seed,
           "quantiles": qs}
    if args.sensitivity:
        sens = grid_sensitivity(table.alpha, table.grid, table.reps, table.seed, args.quantiles,
                                args.workers)
        out["grid_sensitivity"] = {str(q): {"grid": a, "half_grid": b} for q, (a, b) in sens.items()}
    if args.plot_data:
        write_plot_data(args.plot_data, table.values,
                        np.arange(1, table.reps + 1) / table.reps, ("value", "ecdf"))
    return out


def cmd_detect(args) -> dict:
    path = parse_series(args.series)
    cfg = UIConfig(args.alpha, args.level, "external" if args.sigma is not None else "plugin",
                   args.sigma, args.bandwidth)
    res = epidemic_test(path, cfg, _table(args, args.alpha))
    return {"statistic": res.statistic, "ui": res.ui, "sigma": res.sigma, "p_value": res.p_value,
            "reject": res.reject, "interval": list(res.interval), "test": res.config}


def cmd_power(args) -> dict:
    spec = _spec(args)
    cfg = UIConfig(args.alpha, args.level, "external" if args.sigma is not None else "plugin",
                   args.sigma, args.bandwidth)
    table = _table(args, args.alpha)
    curve = power_curve(spec, args.n, cfg, table, args.deltas, args.ell, args.reps, args.seed,
                        args.workers)
    if args.plot_data:
        write_plot_data(args.plot_data, [p.delta for p in curve], [p.power for p in curve],
                        ("delta", "power"))
    return {"spec": spec_to_mapping(spec),
            "curve": [{"delta": p.delta, "power": p.power, "std_error": p.std_error,
                       "drift": p.drift, "rejections": p.rejections} for p in curve]}


# ---------------------------------------------------------------- parser


def _add_common(p):
    p.add_argument("--config", help="INI file with [process] and per-command sections")
    p.add_argument("--seed", type=_seed, default=0, help="root seed (64-bit)")
    p.add_argument("--workers", type=int, default=1, help="threads for replications")
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.add_argument("--plot-data", help="write two-column plot data here")


def _add_process(p):
    g = p.add_argument_group("process")
    g.add_argument("--kind", required=False,
                   help="mdep | linear | recurrence | aug-garch | ergodic-doubling | linear-dependent")
    g.add_argument("--innovations", help="normal | rademacher | uniform-bit | student-t")
    g.add_argument("--df", type=float)
    g.add_argument("--rule", help="linear coefficients: exponential | polynomial | explicit")
    g.add_argument("--rho", type=float)
    g.add_argument("--decay", type=float, help="polynomial decay exponent A")
    g.add_argument("--coeffs")
    g.add_argument("--causal", type=_bool, nargs="?", const=True)
    g.add_argument("--max-lag", type=int)
    g.add_argument("--window", type=int, help="moving-average window m0")
    g.add_argument("--weights")
    g.add_argument("--phi", type=float)
    g.add_argument("--burn-in", type=int)
    g.add_argument("--omega", type=float)
    g.add_argument("--alpha1", type=float)
    g.add_argument("--beta1", type=float)
    g.add_argument("--func", help="cos | sin | tent")
    g.add_argument("--digit-depth", type=int)
    g.add_argument("--inner", help='inner process, e.g. "recurrence: phi=0.5"')


def _add_table(p):
    p.add_argument("--table", help="critical-value table file (built on the fly if omitted)")
    p.add_argument("--grid", type=int, default=4096)
    p.add_argument("--table-reps", type=int, default=2000)
    p.add_argument("--table-seed", type=_seed, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splitinv", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a process to a series file")
    _add_common(p)
    _add_process(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--output", required=True, help="series file to write")
    p.add_argument("--epidemic", type=_floats, help="m1,m2,delta")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("depcheck", help="delta(m) curve, decay fit, long-run variance")
    _add_common(p)
    _add_process(p)
    p.add_argument("--m-grid", type=_ints, default=[2, 4, 8, 16])
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--series", help="series file for a long-run variance estimate")
    p.add_argument("--bandwidth", type=int)
    p.add_argument("--moment-p", type=float, help="report admissible alpha for this moment order")
    p.set_defaults(func=cmd_depcheck)

    p = sub.add_parser("blocks", help="blocking parameters, layout, ladder and scaling")
    _add_common(p)
    _add_process(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--eps0", type=float, required=True)
    p.add_argument("--eps1", type=float, default=0.5)
    p.add_argument("--mode", default="polynomial", help="polynomial | exponential")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--auto-eps1", type=_bool, nargs="?", const=True, default=True,
                   help="halve eps1 until the separation condition holds")
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--sigma2", type=float, help="reference long-run variance")
    p.add_argument("--perturbed", type=_bool, nargs="?", const=True, default=False,
                   help="block variances of the perturbed sequence")
    p.add_argument("--correlation", type=_bool, nargs="?", const=True, default=False,
                   help="also estimate the I/J group correlation")
    p.set_defaults(func=cmd_blocks)

    p = sub.add_parser("increments", help="increment statistic on data or by simulation")
    _add_common(p)
    _add_process(p)
    p.add_argument("--series")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--window-rho", type=float, default=0.6, help="a_n = n^rho")
    p.add_argument("--window-c", type=float, help="a_n = c n (overrides --window-rho)")
    p.add_argument("--sigma", type=float)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--coarse", type=_bool, nargs="?", const=True, default=False,
                   help="geometric lag grid (lower bound, for very long series)")
    p.set_defaults(func=cmd_increments)

    p = sub.add_parser("critvals", help="build or load a critical-value table")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--grid", type=int, default=4096)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--output", help="table file to write")
    p.add_argument("--load", help="table file to read instead of simulating")
    p.add_argument("--quantiles", type=_floats, default=[0.9, 0.95, 0.99])
    p.add_argument("--sensitivity", type=_bool, nargs="?", const=True, default=False,
                   help="also report quantiles at grid/2")
    p.set_defaults(func=cmd_critvals)

    p = sub.add_parser("detect", help="epidemic change-point test on a series file")
    _add_common(p)
    p.add_argument("--series", required=True)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--sigma", type=float, help="known long-run sd (default: plug-in)")
    p.add_argument("--bandwidth", type=int)
    _add_table(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("power", help="power curve under epidemic alternatives")
    _add_common(p)
    _add_process(p)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--deltas", type=_floats, default=[0.0, 0.25, 0.5, 1.0])
    p.add_argument("--ell", type=int, default=400)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--sigma", type=float)
    p.add_argument("--bandwidth", type=int)
    _add_table(p)
    p.set_defaults(func=cmd_power)
    return parser


def _config_defaults(parser, argv) -> None:
    """Apply INI settings as subparser defaults so that flags still win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config or not known.command:
        return
    ini = configparser.ConfigParser(interpolation=None)
    try:
        with open(known.config) as fh:
            ini.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config file {known.config}: {exc}") from None
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    cmd_parser = sub.choices.get(known.command)
    if cmd_parser is None:
        return
    dests = {a.dest for a in cmd_parser._actions}
    defaults = {}
    for section in ("process", known.command):
        if not ini.has_section(section):
            continue
        for key, value in ini.items(section):
            dest = key.replace("-", "_")
            if dest not in dests or dest in ("config", "help", "func"):
                raise ConfigError(f"config file: unknown setting {key!r} in [{section}]")
            defaults[dest] = value
    for action in cmd_parser._actions:
        if action.dest in defaults:
            action.required = False
    cmd_parser.set_defaults(**defaults)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _config_defaults(parser, argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        if getattr(args, "workers", 1) < 1:
            raise ConfigError("--workers must be at least 1")
        func = args.func
        del args.func
        try:
            _emit(args, func(args))
        except ReplicationError as exc:
            cause = exc.cause
            if isinstance(cause, DataError):
                raise DataError(f"replication {exc.index}: {cause}") from None
            if isinstance(cause, ValueError):
                raise ConfigError(f"replication {exc.index}: {cause}") from None
            raise
    except DataError as exc:
        print(f"splitinv: data error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError) as exc:
        print(f"splitinv: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
