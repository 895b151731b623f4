"""Command-line interface: ``ssnreg gen|fit|path|bench``.

Exit codes: 0 success, 2 validation error, 3 solver failure, 4 I/O error.
"""
import argparse
import json
import os
import sys
import time
from importlib.resources import files as package_files

import numpy as np

from . import files
from .bench import AGGREGATE_COLUMNS, GridParseError, load_grid, run_benchmark, write_tables
from .cd import CdOptions, cd_solve
from .kkt import Problem
from .path import (
    EmptySignal,
    NoNonzeroSolution,
    PathOptions,
    fit_lambda,
    select_hbic,
    select_vsc,
    solve_path,
)
from .penalty import DEFAULT_GAMMA, Family, PenaltySpec
from .simgen import SimConfig, generate
from .ssn import OversizedActiveSet, SingularReducedSystem, SsnOptions, ssn_solve

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4

SHIPPED_GRID = "desk.grid"


class CliError(Exception):
    def __init__(self, code, kind, message):
        super().__init__(message)
        self.code = code
        self.kind = kind


def _add_data_args(p):
    p.add_argument("--data-dir", help="directory holding X.csv and y.csv")
    p.add_argument("--X", dest="x_path", help="CSV design matrix (n rows, p columns)")
    p.add_argument("--y", dest="y_path", help="CSV response (n rows, 1 column)")
    p.add_argument("--no-normalize", action="store_true",
                   help="require unit-norm columns instead of rescaling them")
    p.add_argument("--out-dir", required=True)


def _add_penalty_args(p):
    p.add_argument("--penalty", choices=["mcp", "scad"], default="mcp")
    p.add_argument("--gamma", type=float, default=None,
                   help="concavity (default 2.7 for MCP, 3.7 for SCAD)")
    p.add_argument("--solver", choices=["ssn", "cd"], default="ssn")


def build_parser():
    parser = argparse.ArgumentParser(prog="ssnreg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--r", type=float, default=0.0)
    g.add_argument("--sigma", type=float, default=0.0)
    g.add_argument("--T", type=int, default=0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-dir", required=True)

    f = sub.add_parser("fit", help="solve at a single lambda")
    _add_data_args(f)
    _add_penalty_args(f)
    f.add_argument("--lambda", dest="lam", type=float, required=True)
    f.add_argument("--max-iter", type=int, default=None,
                   help="iteration cap at the target lambda (SSN default 50, CD default 10000)")
    f.add_argument("--tol", type=float, default=1e-3, help="CD step tolerance")
    f.add_argument("--ridge-lift", type=float, default=1e-8)
    f.add_argument("--cold", action="store_true",
                   help="start from (0, X^T y) at the target lambda instead of continuation")
    f.add_argument("--alpha", type=float, default=1e-5, help="continuation grid ratio")
    f.add_argument("--M", type=int, default=100, help="continuation grid size")
    f.add_argument("--J", type=int, default=1, help="SSN steps per continuation point")

    pa = sub.add_parser("path", help="warm-started solution path with selection")
    _add_data_args(pa)
    _add_penalty_args(pa)
    pa.add_argument("--alpha", type=float, default=1e-5)
    pa.add_argument("--M", type=int, default=100)
    pa.add_argument("--J", type=int, default=1)
    pa.add_argument("--select", choices=["vsc", "hbic", "none"], default="vsc")
    pa.add_argument("--no-beta", action="store_true", help="omit coefficients from path.jsonl")

    b = sub.add_parser("bench", help="replicated simulation benchmark")
    b.add_argument("--grid-file", default=None,
                   help=f"grid of key=value cells (default: shipped {SHIPPED_GRID})")
    b.add_argument("--replications", "-N", type=int, default=20, help="replications per cell")
    b.add_argument("--seed", type=int, default=0, help="master seed for the replication datasets")
    b.add_argument("--out", required=True, help="output directory")
    return parser


def _load_problem(args):
    if args.data_dir:
        x_path = args.x_path or os.path.join(args.data_dir, "X.csv")
        y_path = args.y_path or os.path.join(args.data_dir, "y.csv")
    elif args.x_path and args.y_path:
        x_path, y_path = args.x_path, args.y_path
    else:
        raise CliError(EXIT_VALIDATION, "usage", "give --data-dir or both --X and --y")
    try:
        X, y = files.read_dataset(x_path, y_path)
    except files.DataFileError as exc:
        raise CliError(EXIT_VALIDATION, "data", str(exc)) from None
    except OSError as exc:
        raise CliError(EXIT_IO, "io", str(exc)) from None
    try:
        return Problem(X, y, normalize=not args.no_normalize)
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, "data", str(exc)) from None


def _gamma(args):
    return DEFAULT_GAMMA[Family(args.penalty)] if args.gamma is None else args.gamma


def _write_scale(out, problem, name, beta):
    if np.any(problem.scale != 1.0):
        files.write_vector(os.path.join(out, "scale.csv"), problem.scale)
        files.write_vector(os.path.join(out, name), beta / problem.scale)


def cmd_gen(args, started):
    try:
        config = SimConfig(args.n, args.p, args.r, args.sigma, args.T, args.seed)
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, "validation", str(exc)) from None
    out = files.ensure_dir(args.out_dir)
    X, y, beta = generate(config)
    files.write_matrix(os.path.join(out, "X.csv"), X)
    files.write_vector(os.path.join(out, "y.csv"), y)
    files.write_vector(os.path.join(out, "beta_true.csv"), beta)
    files.write_json(os.path.join(out, "manifest.json"),
                     files.manifest("gen", vars(args), started, seed=args.seed))


def cmd_fit(args, started):
    try:
        spec = PenaltySpec.make(args.penalty, args.lam, _gamma(args))
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, "validation", str(exc)) from None
    try:
        path_opts = PathOptions(alpha=args.alpha, M=args.M, J=args.J, ridge_lift=args.ridge_lift,
                                cd_tol=args.tol, cd_max_iter=args.max_iter or 10_000)
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, "validation", str(exc)) from None
    problem = _load_problem(args)
    out = files.ensure_dir(args.out_dir)
    try:
        if args.cold and args.solver == "ssn":
            opts = SsnOptions(ridge_lift=args.ridge_lift)
            sol = ssn_solve(problem, spec, opts=opts, max_iter=args.max_iter)
        elif args.cold:
            opts = CdOptions(max_iter=args.max_iter or 10_000, tol=args.tol)
            sol = cd_solve(problem, spec, opts=opts)
        else:
            sol = fit_lambda(problem, spec, args.solver, path_opts,
                             final_max_iter=args.max_iter or SsnOptions().cold_max_iter)
    except (SingularReducedSystem, OversizedActiveSet) as exc:
        raise CliError(EXIT_SOLVER, type(exc).__name__, str(exc)) from None
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, "validation", str(exc)) from None

    files.write_vector(os.path.join(out, "beta.csv"), sol.beta)
    files.write_vector(os.path.join(out, "d.csv"), sol.d)
    _write_scale(out, problem, "beta_raw.csv", sol.beta)
    report = {
        "penalty": spec.family.value,
        "lambda": spec.lam,
        "gamma": spec.gamma,
        "solver": args.solver,
        "iters": sol.iters,
        "converged_by": sol.converged_by.value,
        "kkt_inf": sol.kkt_inf,
        "lifted": sol.lifted,
        "support": sol.support.tolist(),
    }
    files.write_json(os.path.join(out, "report.json"), report)
    files.write_json(os.path.join(out, "manifest.json"), files.manifest("fit", vars(args), started))
    print(json.dumps({k: report[k] for k in ("iters", "converged_by", "kkt_inf")}))


def cmd_path(args, started):
    try:
        opts = PathOptions(alpha=args.alpha, M=args.M, J=args.J)
        PenaltySpec.make(args.penalty, 1.0, _gamma(args))
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, "validation", str(exc)) from None
    problem = _load_problem(args)
    out = files.ensure_dir(args.out_dir)
    try:
        path = solve_path(problem, args.penalty, _gamma(args), args.solver, opts)
    except EmptySignal as exc:
        raise CliError(EXIT_VALIDATION, "EmptySignal", str(exc)) from None

    records = []
    for t in range(len(path)):
        support = np.flatnonzero(path.betas[t])
        rec = {
            "index": t,
            "lambda": float(path.lambdas[t]),
            "support_size": int(path.support_size[t]),
            "kkt_inf": float(path.kkt_inf[t]),
            "iters": int(path.iters[t]),
            "converged_by": path.converged_by[t],
        }
        if not args.no_beta:
            rec["support"] = support.tolist()
            rec["beta"] = path.betas[t][support].tolist()
        records.append(rec)
    files.write_jsonl(os.path.join(out, "path.jsonl"), records)

    summary = {
        "points": len(path),
        "terminated_early": path.terminated_early,
        "size_cap": path.size_cap,
        "failure": path.failure,
    }
    if args.select != "none":
        try:
            sel = select_vsc(path) if args.select == "vsc" else select_hbic(path, problem)
        except NoNonzeroSolution as exc:
            raise CliError(EXIT_SOLVER, "NoNonzeroSolution", str(exc)) from None
        files.write_vector(os.path.join(out, "selected.csv"), sel.beta)
        _write_scale(out, problem, "selected_raw.csv", sel.beta)
        summary["selected"] = {
            "selector": args.select,
            "index": sel.index,
            "lambda": sel.lam,
            "size": sel.size,
            "support": np.flatnonzero(sel.beta).tolist(),
        }
        files.write_json(os.path.join(out, "selected.json"), summary["selected"])
    files.write_json(os.path.join(out, "manifest.json"),
                     {**files.manifest("path", vars(args), started), "summary": summary})
    if path.failure is not None:
        print(f"path truncated: {path.failure['error']} at index {path.failure['index']}",
              file=sys.stderr)


def cmd_bench(args, started):
    if args.replications < 0:
        raise CliError(EXIT_VALIDATION, "validation", "--replications must be >= 0")
    grid = args.grid_file or str(package_files("ssnreg") / "data" / SHIPPED_GRID)
    out = files.ensure_dir(args.out)
    try:
        cells = load_grid(grid)
    except GridParseError as exc:
        raise CliError(EXIT_VALIDATION, "GridParseError", f"{grid}: {exc}") from None
    except OSError as exc:
        raise CliError(EXIT_IO, "io", str(exc)) from None
    records, aggregates = run_benchmark(cells, args.replications, args.seed)
    write_tables(aggregates, os.path.join(out, "aggregate.csv"), os.path.join(out, "timing.csv"))
    files.write_jsonl(os.path.join(out, "replications.jsonl"), records)
    files.write_json(os.path.join(out, "manifest.json"),
                     {**files.manifest("bench", {**vars(args), "grid_file": grid}, started, seed=args.seed),
                      "cells": len(cells)})
    for row in aggregates:
        print(", ".join(f"{k}={row[k]}" for k in AGGREGATE_COLUMNS if k in row))


COMMANDS = {"gen": cmd_gen, "fit": cmd_fit, "path": cmd_path, "bench": cmd_bench}


def _report_error(args, err):
    record = {"error": err.kind, "message": str(err), "exit_code": err.code}
    print(json.dumps(record), file=sys.stderr)
    out = getattr(args, "out_dir", None) or getattr(args, "out", None)
    if out and os.path.isdir(out):
        try:
            files.write_json(os.path.join(out, "error.json"), record)
        except OSError:
            pass


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        COMMANDS[args.command](args, started)
    except CliError as err:
        _report_error(args, err)
        return err.code
    except OSError as exc:
        _report_error(args, CliError(EXIT_IO, "io", str(exc)))
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
