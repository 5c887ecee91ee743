"""deformed-md: evaluate deformed logarithms, run and sweep optimizers, verify invariants.

Exit codes: 0 success, 1 verify failures, 2 usage/config/validation error,
3 numerical divergence.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import replace
import io
import itertools
import math
import os
import sys

import numpy as np

from . import config as cfg
from .core import Family, HYPERPARAMETERS, dlog_d, exp_d_clip, log_d, validate
from .errors import DeformedError, ExpOverflowError, StepError
from .grids import params_product
from .optim import run
from .problems import make_problem
from .verify import run_suite

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_DIVERGED = 0, 1, 2, 3

EVAL_COLUMNS = ("family", "params", "x", "log_d", "exp_d", "dlog_d")
TRACE_COLUMNS = ("iter", "loss", "grad_norm", "min_w", "clips")
SWEEP_COLUMNS = ("cell", "family", "params", "eta", "seed", "problem", "rule", "projection",
                 "iterations", "final_loss", "distance", "termination", "error")


class UsageError(Exception):
    pass


def fmt(value):
    """Shortest round-trip text for floats; str() for everything else."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def render_csv(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def emit(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _params_label(params):
    return ";".join(f"{k}={v!r}" for k, v in params.hyperparameters().items())


# --- argument helpers --------------------------------------------------------

def parse_param(spec):
    """``name=v1,v2,...`` -> (name, [floats])."""
    name, sep, rest = spec.partition("=")
    if not sep or not name or not rest:
        raise UsageError(f"--param expects name=v1,v2,..., got {spec!r}")
    try:
        values = [float(v) for v in rest.split(",")]
    except ValueError:
        raise UsageError(f"--param {name}: non-numeric value in {rest!r}") from None
    return name.strip(), values


def parse_grid(spec):
    """x-grid: ``START:STOP:NUM`` (linear), ``log:START:STOP:NUM`` or ``v1,v2,...``."""
    try:
        if spec.startswith("log:"):
            a, b, n = spec[4:].split(":")
            a, b, n = float(a), float(b), int(n)
            if not (a > 0 and b > 0):
                raise UsageError(f"log grid needs positive endpoints, got {spec!r}")
            xs = np.logspace(math.log10(a), math.log10(b), n)
        elif ":" in spec:
            a, b, n = spec.split(":")
            xs = np.linspace(float(a), float(b), int(n))
        else:
            xs = np.array([float(v) for v in spec.split(",")])
    except ValueError:
        raise UsageError(f"bad --grid spec {spec!r}") from None
    if xs.size == 0:
        raise UsageError(f"--grid {spec!r} is empty")
    return xs


def _params_from_args(family, param_specs):
    fam = Family(family)
    values = dict(parse_param(s) for s in param_specs or [])
    try:
        return params_product(fam, values)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


# --- subcommands -------------------------------------------------------------

def cmd_eval(args):
    plist = _params_from_args(args.family, args.param)
    xs = parse_grid(args.grid)
    if np.any(xs <= 0):
        raise UsageError("--grid must contain positive x only (log_d is defined on x > 0)")
    rows = []
    for p in plist:
        rep = validate(p)
        if not rep.monotone_ok or (not rep.concave_ok and not args.allow_nonconcave):
            raise DeformedError(f"invalid parameters {p}: {'; '.join(rep.messages)}")
        lg = np.asarray(log_d(p, xs))
        dl = np.asarray(dlog_d(p, xs))
        label = _params_label(p)
        for i, x in enumerate(xs):
            try:
                ex, _ = exp_d_clip(p, float(x))
            except ExpOverflowError:
                ex = math.inf
            rows.append((p.family.value, label, float(x), float(lg[i]), ex, float(dl[i])))
    emit(render_csv(EVAL_COLUMNS, rows), args.out)
    return EXIT_OK


def _resolve(config):
    params = config.entropy_params()
    problem = make_problem(config.problem, config.dimension, config.seed)
    return params, problem


def cmd_optimize(args):
    config = cfg.apply_env(cfg.load(args.config), os.environ)
    params, problem = _resolve(config)
    out = args.out if args.out is not None else config.output
    diverged = None
    try:
        trace = run(problem, params, config.update_rule(), config.optimizer_config())
        records = trace.records
        termination = trace.termination
        weights = trace.weights
    except StepError as exc:
        diverged = str(exc)
        records, termination, weights = [], "step_error", None
    rows = [(r.iteration, r.loss, r.grad_norm, r.w_min, r.clips) for r in records]
    emit(render_csv(TRACE_COLUMNS, rows), out)
    final = records[-1].loss if records else math.nan
    dist = problem.distance_to_optimum(weights) if weights is not None else None
    summary = (f"summary iterations={len(records) - 1 if records else 0} final_loss={fmt(final)} "
               f"distance={fmt(dist) if dist is not None else 'na'} termination={termination}")
    print(summary, file=sys.stderr if out in (None, "-") else sys.stdout)
    if diverged is not None:
        print(f"deformed-md: {diverged}", file=sys.stderr)
        return EXIT_DIVERGED
    if termination == "diverged":
        return EXIT_DIVERGED
    return EXIT_OK


def sweep_cells(config):
    """Cartesian product of the grid axes, in canonical axis order."""
    grid = config.grid or {}
    names = [n for n in HYPERPARAMETERS[Family(config.family)] if n in grid]
    axes = names + [a for a in cfg.GRID_EXTRA_AXES if a in grid]
    if not axes or any(len(grid[a]) == 0 for a in axes):
        return []
    cells = []
    for combo in itertools.product(*(grid[a] for a in axes)):
        values = dict(zip(axes, combo))
        params = dict(config.params)
        params.update({n: values[n] for n in names})
        cells.append(replace(config, params=params, grid=None,
                             eta=values.get("eta", config.eta),
                             seed=values.get("seed", config.seed)))
    return cells


def _run_cell(index, cell):
    row = {"cell": index, "family": cell.family, "eta": cell.eta, "seed": cell.seed,
           "problem": cell.problem, "rule": cell.rule, "projection": cell.projection,
           "params": ";".join(f"{k}={v!r}" for k, v in cell.params.items()),
           "iterations": None, "final_loss": None, "distance": None,
           "termination": None, "error": ""}
    try:
        params, problem = _resolve(cell)
        row["params"] = _params_label(params)
        trace = run(problem, params, cell.update_rule(), cell.optimizer_config())
        row["iterations"] = trace.iterations
        row["final_loss"] = trace.losses[-1]
        row["distance"] = problem.distance_to_optimum(trace.weights)
        row["termination"] = trace.termination
        if trace.termination == "diverged":
            row["error"] = "non-finite loss"
    except DeformedError as exc:
        row["termination"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_sweep(args):
    config = cfg.apply_env(cfg.load(args.config, allow_grid=True), os.environ)
    cells = sweep_cells(config)
    if args.jobs > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_cell, range(len(cells)), cells))
    else:
        results = [_run_cell(i, c) for i, c in enumerate(cells)]
    results.sort(key=lambda r: r["cell"])
    rows = [[r[c] for c in SWEEP_COLUMNS] for r in results]
    out = args.out if args.out is not None else config.output
    emit(render_csv(SWEEP_COLUMNS, rows), out)
    failed = sum(1 for r in results if r["error"])
    print(f"summary cells={len(results)} failed={failed}",
          file=sys.stderr if out in (None, "-") else sys.stdout)
    if results and failed == len(results):
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_verify(args):
    plist = None
    if args.family is not None:
        plist = _params_from_args(args.family, args.param)
    elif args.param:
        raise UsageError("--param needs --family")
    try:
        checks = run_suite(args.suite, plist)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    for c in checks:
        print(c.line())
    failed = sum(1 for c in checks if not c.passed)
    print(f"summary suite={args.suite} checks={len(checks)} failed={failed} "
          f"status={'FAIL' if failed else 'PASS'}")
    return EXIT_VERIFY if failed else EXIT_OK


# --- entry point -------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="deformed-md", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    families = [f.value for f in Family]

    p = sub.add_parser("eval", help="tabulate log_d, exp_d and dlog_d on an x grid")
    p.add_argument("--family", required=True, choices=families)
    p.add_argument("--param", action="append", metavar="NAME=V1,V2",
                   help="hyperparameter values; repeat per hyperparameter")
    p.add_argument("--grid", default="0.1:5:50", metavar="SPEC",
                   help="START:STOP:NUM, log:START:STOP:NUM or v1,v2,... (default: %(default)s)")
    p.add_argument("--allow-nonconcave", action="store_true",
                   help="accept monotone but non-concave parameters")
    p.add_argument("--out", metavar="PATH", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("optimize", help="run one optimizer configuration")
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--out", metavar="PATH", help="trace CSV path (overrides config output)")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="run a hyperparameter grid, one summary row per cell")
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--out", metavar="PATH", help="CSV path (overrides config output)")
    p.add_argument("--jobs", type=int, default=1, help="worker threads (default 1)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", default="all", metavar="NAME",
                   help="roundtrip, derivatives, algebra, equivalence, simplex, descent or all")
    p.add_argument("--family", choices=families, help="verify injected parameters instead")
    p.add_argument("--param", action="append", metavar="NAME=V1,V2")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, cfg.ConfigError) as exc:
        print(f"deformed-md: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DeformedError as exc:
        print(f"deformed-md: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
