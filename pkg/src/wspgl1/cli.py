"""Command-line interface: single-instance recovery, phase-transition
grids, and solution-path traces, with reproducible run configuration.

Exit codes: 0 success, 2 solver failed to converge, 1 usage or I/O
errors. Every run that writes artifacts also writes a ``run.cfg``
snapshot of the fully resolved settings; the snapshot can be fed back
through ``--config`` to reproduce the run.
"""

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from .drivers import DriverConfig
from .harness import (
    KNOWN_ALGORITHMS,
    ExperimentPlan,
    make_instance,
    run_algorithm,
    run_grid,
    summarize,
    trace_paths,
    write_records_csv,
    write_summary_csv,
    write_trace_csv,
)

__all__ = ["main", "entry"]


class _UsageError(Exception):
    """Bad flags, config values, or plan parameters; exits with status 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; we reserve 2 for
    # non-convergence, so route usage problems through _UsageError
    def error(self, message):
        raise _UsageError(message)


def _int(text):
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")


def _float(text):
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _floats(text):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list, got {text!r}")
    return tuple(_float(p) for p in parts)


def _names(text):
    parts = tuple(p.strip() for p in text.split(",") if p.strip())
    if not parts:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list, got {text!r}")
    return parts


def _optional_int(text):
    if text.strip().lower() in ("auto", "none"):
        return None
    return _int(text)


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _read_kv_file(path):
    """Flat ``key = value`` file; blank lines and # comments ignored."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot read config file {path}: {exc}")
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _UsageError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        pairs[key.strip()] = value.strip()
    return pairs


def _merge(defaults, schema, args, config_paths):
    """Effective settings: defaults, then config files, then explicit flags."""
    cfg = dict(defaults)
    for path in config_paths:
        if path is None:
            continue
        for key, text in _read_kv_file(path).items():
            if key not in schema:
                raise _UsageError(f"{path}: unknown config key {key!r}")
            try:
                cfg[key] = schema[key](text)
            except argparse.ArgumentTypeError as exc:
                raise _UsageError(f"{path}: key {key!r}: {exc}")
    for key in schema:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _cfg_value(value):
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ",".join(_cfg_value(v) for v in value)
    return str(value)


def _write_snapshot(outdir, cfg):
    lines = [f"{key} = {_cfg_value(cfg[key])}" for key in sorted(cfg)]
    with open(Path(outdir) / "run.cfg", "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _ensure_dir(path):
    outdir = Path(path)
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _require(cond, message):
    if not cond:
        raise _UsageError(message)


def _validate_instance_flags(cfg):
    _require(cfg["n"] >= 2, f"--n must be at least 2, got {cfg['n']}")
    _require(cfg["N"] > cfg["n"], f"--N must exceed --n, got N={cfg['N']}, n={cfg['n']}")
    _require(cfg["k"] >= 1, f"--k must be at least 1, got {cfg['k']}")
    _require(cfg["k"] <= cfg["N"], f"--k must not exceed --N, got k={cfg['k']}, N={cfg['N']}")
    _require(0.0 < cfg["omega"] <= 1.0, f"--omega must lie in (0, 1], got {cfg['omega']}")
    _require(cfg["epsilon_rel"] >= 0.0,
             f"--epsilon-rel must be nonnegative, got {cfg['epsilon_rel']}")
    if cfg["support_size"] is not None:
        _require(1 <= cfg["support_size"] < cfg["n"],
                 f"--support-size must lie in [1, n), got {cfg['support_size']}")


_RECOVER_SCHEMA = {
    "n": _int, "N": _int, "k": _int, "seed": _int, "algorithm": str,
    "omega": _float, "epsilon_rel": _float, "support_size": _optional_int,
    "success_threshold": _float,
}

_RECOVER_DEFAULTS = {
    "n": 100, "N": 400, "k": 20, "seed": 0, "algorithm": "wspgl1",
    "omega": 0.3, "epsilon_rel": 1e-6, "support_size": None,
    "success_threshold": 1e-3,
}


def _cmd_recover(args):
    cfg = _merge(_RECOVER_DEFAULTS, _RECOVER_SCHEMA, args, [args.config])
    _validate_instance_flags(cfg)
    _require(cfg["algorithm"] in KNOWN_ALGORITHMS,
             f"--algorithm must be one of {', '.join(KNOWN_ALGORITHMS)}, got {cfg['algorithm']!r}")
    _require(cfg["success_threshold"] > 0.0,
             f"--threshold must be positive, got {cfg['success_threshold']}")

    data_op, signal, meas = make_instance(cfg["n"], cfg["N"], cfg["k"], cfg["seed"])
    epsilon = cfg["epsilon_rel"] * float(np.linalg.norm(meas.y))
    driver = DriverConfig(omega=cfg["omega"], support_size=cfg["support_size"])
    result = run_algorithm(cfg["algorithm"], data_op.fork(), meas.y, epsilon,
                           signal=signal, driver=driver)
    rel = float(np.linalg.norm(result.x_hat - signal.values) / np.linalg.norm(signal.values))
    success = rel <= cfg["success_threshold"]

    print(f"algorithm = {cfg['algorithm']}")
    print(f"n = {cfg['n']}")
    print(f"N = {cfg['N']}")
    print(f"k = {cfg['k']}")
    print(f"seed = {cfg['seed']}")
    print(f"epsilon = {epsilon!r}")
    print(f"converged = {_cfg_value(result.converged)}")
    print(f"success = {_cfg_value(bool(success))}")
    print(f"rel_error = {rel!r}")
    print(f"newton_iters = {result.newton_iters}")
    print(f"products = {result.total_products}")

    if args.output is not None:
        outdir = _ensure_dir(args.output)
        with open(outdir / "x_hat.txt", "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(repr(float(v)) for v in result.x_hat) + "\n")
        _write_snapshot(outdir, cfg)
        print(f"wrote {outdir / 'x_hat.txt'}")
    return 0 if result.converged else 2


_PHASE_SCHEMA = {
    "N": _int, "n_fractions": _floats, "sparsity_ratios": _floats, "trials": _int,
    "algorithms": _names, "seed_base": _int, "success_threshold": _float,
    "epsilon_rel": _float, "omega": _float, "support_size": _optional_int,
    "jobs": _int, "timing": _bool,
}


def _phase_defaults():
    return {
        "N": 2000, "n_fractions": (0.1, 0.25, 0.5),
        "sparsity_ratios": (0.1, 0.2, 0.3, 0.4, 0.5), "trials": 100,
        "algorithms": ("spgl1", "wspgl1", "irwl1"), "seed_base": 0,
        "success_threshold": 1e-3, "epsilon_rel": 1e-6, "omega": 0.3,
        "support_size": None, "jobs": os.cpu_count() or 1, "timing": False,
    }


def _cmd_phase(args):
    cfg = _merge(_phase_defaults(), _PHASE_SCHEMA, args, [args.config, args.plan_file])
    _require(cfg["jobs"] >= 1, f"--jobs must be at least 1, got {cfg['jobs']}")
    plan = ExperimentPlan(
        N=cfg["N"], n_fractions=cfg["n_fractions"], sparsity_ratios=cfg["sparsity_ratios"],
        trials=cfg["trials"], algorithms=cfg["algorithms"], seed_base=cfg["seed_base"],
        success_threshold=cfg["success_threshold"], epsilon_rel=cfg["epsilon_rel"],
        omega=cfg["omega"], support_size=cfg["support_size"],
    )
    errs = plan.validation_errors()
    if errs:
        raise _UsageError("invalid plan: " + "; ".join(errs))
    outdir = _ensure_dir(args.out)

    started = time.perf_counter()

    def progress(done, total, n, k):
        print(f"[{done}/{total}] n={n} k={k} done, elapsed {time.perf_counter() - started:.1f}s",
              flush=True)

    records = run_grid(plan, jobs=cfg["jobs"], measure_time=cfg["timing"], progress=progress)
    rows = summarize(records)
    write_records_csv(records, outdir / "records.csv")
    write_summary_csv(rows, outdir / "summary.csv")
    _write_snapshot(outdir, cfg)

    print(f"{'algorithm':<9} {'n':>5} {'k':>5} {'k/n':>5} {'rate':>6} {'products':>10} {'error':>11}")
    for s in rows:
        print(f"{s.algorithm:<9} {s.n:>5} {s.k:>5} {s.sparsity:>5.2f} "
              f"{s.success_rate:>6.2f} {s.mean_products:>10.1f} {s.mean_error:>11.3e}")
    print(f"wrote {outdir / 'records.csv'}, {outdir / 'summary.csv'}, {outdir / 'run.cfg'}")
    return 0


_PATH_SCHEMA = {
    "n": _int, "N": _int, "k": _int, "seed": _int, "omega": _float,
    "epsilon_rel": _float, "support_size": _optional_int,
}

_PATH_DEFAULTS = {
    "n": 100, "N": 400, "k": 20, "seed": 0, "omega": 0.3,
    "epsilon_rel": 1e-6, "support_size": None,
}


def _cmd_path(args):
    cfg = _merge(_PATH_DEFAULTS, _PATH_SCHEMA, args, [args.config])
    _validate_instance_flags(cfg)
    data_op, signal, meas = make_instance(cfg["n"], cfg["N"], cfg["k"], cfg["seed"])
    epsilon = cfg["epsilon_rel"] * float(np.linalg.norm(meas.y))
    driver = DriverConfig(omega=cfg["omega"], support_size=cfg["support_size"])
    traces = trace_paths(data_op, meas.y, epsilon, signal.support, driver)
    outdir = _ensure_dir(args.out)
    for name in sorted(traces):
        write_trace_csv(traces[name], outdir / f"trace_{name}.csv")
        final = traces[name].points[-1]
        print(f"{name}: {len(traces[name].points)} points, "
              f"final tau = {final.tau!r}, final residual = {final.residual_norm!r}")
    _write_snapshot(outdir, cfg)
    print(f"wrote trace CSVs and run.cfg to {outdir}")
    return 0


def _build_parser():
    parser = _Parser(prog="wspgl1",
                     description="Sparse recovery with Pareto root-finding solvers.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{recover,phase,path}")

    rec = sub.add_parser("recover", help="solve one planted instance",
                         description="Generate a planted instance, run one solver, "
                                     "and report recovery quality.")
    rec.add_argument("--config", metavar="FILE", help="key = value file overriding defaults")
    rec.add_argument("--n", type=_int, help="rows (default 100)")
    rec.add_argument("--N", type=_int, help="columns (default 400)")
    rec.add_argument("--k", type=_int, help="signal sparsity (default 20)")
    rec.add_argument("--seed", type=_int, help="instance seed (default 0)")
    rec.add_argument("--algorithm", type=str, metavar="NAME",
                     help=f"one of {', '.join(KNOWN_ALGORITHMS)} (default wspgl1)")
    rec.add_argument("--omega", type=_float, help="support weight in (0, 1] (default 0.3)")
    rec.add_argument("--epsilon-rel", type=_float,
                     help="residual target relative to ||y|| (default 1e-6)")
    rec.add_argument("--threshold", dest="success_threshold", type=_float,
                     help="relative-error success threshold (default 1e-3)")
    rec.add_argument("--support-size", type=_optional_int, metavar="K",
                     help="support-estimate size, or 'auto' (default)")
    rec.add_argument("--output", metavar="DIR", help="directory for x_hat.txt and run.cfg")
    rec.set_defaults(func=_cmd_recover)

    pha = sub.add_parser("phase", help="run a phase-transition grid",
                         description="Run a trial grid over row counts and sparsity "
                                     "levels and write records.csv / summary.csv.")
    pha.add_argument("--config", metavar="FILE", help="key = value file overriding defaults")
    pha.add_argument("--plan-file", metavar="FILE",
                     help="key = value plan file (same keys; applied after --config)")
    pha.add_argument("--N", type=_int, help="ambient dimension (default 2000)")
    pha.add_argument("--n-fractions", type=_floats, metavar="LIST",
                     help="comma-separated n/N fractions (default 0.1,0.25,0.5)")
    pha.add_argument("--ratios", dest="sparsity_ratios", type=_floats, metavar="LIST",
                     help="comma-separated k/n ratios (default 0.1,...,0.5)")
    pha.add_argument("--trials", type=_int, help="trials per cell (default 100)")
    pha.add_argument("--algorithms", type=_names, metavar="LIST",
                     help="comma-separated algorithms (default spgl1,wspgl1,irwl1)")
    pha.add_argument("--seed-base", type=_int, help="base seed for the grid (default 0)")
    pha.add_argument("--threshold", dest="success_threshold", type=_float,
                     help="relative-error success threshold (default 1e-3)")
    pha.add_argument("--epsilon-rel", type=_float,
                     help="residual target relative to ||y|| (default 1e-6)")
    pha.add_argument("--omega", type=_float, help="support weight in (0, 1] (default 0.3)")
    pha.add_argument("--support-size", type=_optional_int, metavar="K",
                     help="support-estimate size, or 'auto' (default)")
    pha.add_argument("--jobs", type=_int, help="worker processes (default: core count)")
    pha.add_argument("--timing", action="store_true", default=None,
                     help="record real wall times (records are then not byte-reproducible)")
    pha.add_argument("--out", required=True, metavar="DIR", help="output directory")
    pha.set_defaults(func=_cmd_phase)

    pat = sub.add_parser("path", help="trace solution paths on one instance",
                         description="Trace the Pareto root-finding paths of the three "
                                     "drivers on one instance and write one CSV each.")
    pat.add_argument("--config", metavar="FILE", help="key = value file overriding defaults")
    pat.add_argument("--n", type=_int, help="rows (default 100)")
    pat.add_argument("--N", type=_int, help="columns (default 400)")
    pat.add_argument("--k", type=_int, help="signal sparsity (default 20)")
    pat.add_argument("--seed", type=_int, help="instance seed (default 0)")
    pat.add_argument("--omega", type=_float, help="support weight in (0, 1] (default 0.3)")
    pat.add_argument("--epsilon-rel", type=_float,
                     help="residual target relative to ||y|| (default 1e-6)")
    pat.add_argument("--support-size", type=_optional_int, metavar="K",
                     help="support-estimate size, or 'auto' (default)")
    pat.add_argument("--out", required=True, metavar="DIR", help="output directory")
    pat.set_defaults(func=_cmd_path)
    return parser


def main(argv=None):
    """Run the CLI and return the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        # argparse exits directly for --help; keep its status
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry():
    sys.exit(main())
