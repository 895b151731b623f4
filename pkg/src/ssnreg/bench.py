"""Replicated simulation benchmarks over a grid of cells.

A grid file holds one cell per line as whitespace-separated ``key=value``
pairs; ``#`` starts a comment. Recognised keys::

    n p r sigma T penalty gamma solver alpha M J select

``p`` is required. ``n`` defaults to floor(p/5) and ``T`` to
floor(n / (2 log p)). Replication m of every cell uses the same dataset seed,
derived from the master seed, so solvers are compared on identical data.
"""
import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .kkt import Problem
from .path import NoNonzeroSolution, PathOptions, select_hbic, select_vsc, solve_path
from .penalty import DEFAULT_GAMMA, Family, PenaltySpec
from .simgen import SimConfig, evaluate_metrics, generate


class GridParseError(ValueError):
    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class BenchCell:
    p: int
    n: int
    T: int
    r: float = 0.0
    sigma: float = 0.0
    penalty: str = "mcp"
    gamma: float = 2.7
    solver: str = "ssn"
    alpha: float = 1e-5
    M: int = 100
    J: int = 1
    select: str = "vsc"

    def sim_config(self, seed):
        return SimConfig(self.n, self.p, self.r, self.sigma, self.T, int(seed))

    def path_options(self):
        return PathOptions(alpha=self.alpha, M=self.M, J=self.J)


_CASTS = {
    "n": int, "p": int, "T": int, "r": float, "sigma": float, "penalty": str,
    "gamma": float, "solver": str, "alpha": float, "M": int, "J": int, "select": str,
}


def make_cell(**kw):
    p = int(kw["p"])
    n = int(kw.get("n", p // 5))
    if "T" not in kw:
        kw["T"] = math.floor(n / (2 * math.log(p))) if p > 1 else 1
    penalty = Family(str(kw.get("penalty", "mcp")).lower())
    kw["penalty"] = penalty.value
    kw.setdefault("gamma", DEFAULT_GAMMA[penalty])
    kw["n"] = n
    cell = BenchCell(**{k: _CASTS[k](v) for k, v in kw.items()})
    if cell.solver not in ("ssn", "cd"):
        raise ValueError(f"unknown solver {cell.solver!r}")
    if cell.select not in ("vsc", "hbic"):
        raise ValueError(f"unknown selector {cell.select!r}")
    # validate the pieces that have their own checks
    cell.sim_config(0)
    cell.path_options()
    PenaltySpec.make(cell.penalty, 1.0, cell.gamma)
    return cell


def parse_grid(text):
    cells = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = {}
        for token in line.split():
            key, sep, value = token.partition("=")
            if not sep or not key or not value:
                raise GridParseError(lineno, f"expected key=value, got {token!r}")
            if key not in _CASTS:
                raise GridParseError(lineno, f"unknown key {key!r}")
            if key in fields:
                raise GridParseError(lineno, f"duplicate key {key!r}")
            fields[key] = value
        if "p" not in fields:
            raise GridParseError(lineno, "missing required key 'p'")
        try:
            cells.append(make_cell(**fields))
        except (ValueError, TypeError) as exc:
            raise GridParseError(lineno, str(exc)) from None
    return cells


def load_grid(path):
    with open(path) as fh:
        return parse_grid(fh.read())


def replication_seeds(master_seed, N):
    children = np.random.SeedSequence(master_seed).spawn(N)
    return [int(c.generate_state(1)[0]) for c in children]


def run_replication(cell, seed):
    """Generate one dataset, run the path and selector, score the pick."""
    X, y, beta_true = generate(cell.sim_config(seed))
    problem = Problem(X, y, normalize=True)
    record = {"seed": seed}
    start = time.perf_counter()
    path = solve_path(problem, cell.penalty, cell.gamma, cell.solver, cell.path_options())
    try:
        sel = select_vsc(path) if cell.select == "vsc" else select_hbic(path, problem)
    except NoNonzeroSolution as exc:
        sel = None
        record["failure"] = f"NoNonzeroSolution: {exc}"
    elapsed = time.perf_counter() - start
    if path.failure is not None:
        record["path_failure"] = f"{path.failure['error']} at lambda index {path.failure['index']}"

    fixed = [k for k, c in zip(path.kkt_inf, path.converged_by) if c == "active_set_fixed"]
    record.update(
        path_len=len(path),
        terminated_early=path.terminated_early,
        n_fixed=len(fixed),
        kkt_fixed_max=float(max(fixed)) if fixed else 0.0,
        mean_iters=float(np.mean(path.iters)) if len(path) else 0.0,
        time=elapsed,
    )
    if sel is None:
        return record
    beta_hat = sel.beta / problem.scale
    m = evaluate_metrics(beta_hat, beta_true, X, y, elapsed)
    record.update(m.as_dict())
    record.update(
        lam_index=sel.index,
        lam=sel.lam,
        support=np.flatnonzero(beta_hat).tolist(),
        true_support=np.flatnonzero(beta_true).tolist(),
    )
    return record


def _task(args):
    cell_index, rep, cell, seed = args
    rec = run_replication(cell, seed)
    return {"cell": cell_index, "rep": rep, **rec}


def _workers():
    try:
        return max(1, int(os.environ.get("SSNREG_THREADS", "1")))
    except ValueError:
        return 1


ACCURACY_FIELDS = ["MS", "CM", "AE", "RE", "PE", "mean_iters"]


def aggregate(cells, records):
    rows = []
    for i, cell in enumerate(cells):
        recs = [r for r in records if r["cell"] == i]
        ok = [r for r in recs if "failure" not in r and "ms" in r]
        row = {
            "cell": i,
            **asdict(cell),
            "N": len(recs),
            "failures": len(recs) - len(ok),
            "path_failures": sum("path_failure" in r for r in recs),
        }
        if ok:
            row.update(
                MS=float(np.mean([r["ms"] for r in ok])),
                CM=float(np.mean([r["cm"] for r in ok])),
                AE=float(np.mean([r["ae"] for r in ok])),
                RE=float(np.mean([r["re"] for r in ok])),
                PE=float(np.mean([r["pe"] for r in ok])),
                mean_iters=float(np.mean([r["mean_iters"] for r in ok])),
            )
        else:
            row.update({k: float("nan") for k in ACCURACY_FIELDS})
        times = [r["time"] for r in recs]
        row["time_mean"] = float(np.mean(times)) if times else float("nan")
        row["time_median"] = float(np.median(times)) if times else float("nan")
        rows.append(row)
    return rows


def run_benchmark(cells, N, master_seed=0, workers=None):
    """Run N replications of every cell.

    Returns ``(records, aggregates)``: one dict per (cell, replication) and
    one per cell. Records are ordered by (cell, replication) whatever the
    worker count.
    """
    seeds = replication_seeds(master_seed, N)
    tasks = [(i, m, cell, seeds[m]) for i, cell in enumerate(cells) for m in range(N)]
    workers = workers or _workers()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_task, tasks))
    else:
        records = [_task(t) for t in tasks]
    records.sort(key=lambda r: (r["cell"], r["rep"]))
    return records, aggregate(cells, records)


CELL_FIELDS = list(BenchCell.__dataclass_fields__)
AGGREGATE_COLUMNS = ["cell", *CELL_FIELDS, "N", "failures", "path_failures", *ACCURACY_FIELDS]
TIMING_COLUMNS = ["cell", "solver", "penalty", "time_mean", "time_median"]


def write_tables(aggregates, aggregate_path, timing_path):
    """Accuracy aggregates and wall-clock timings go to separate CSVs; only
    the first is reproducible run to run."""
    with open(aggregate_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=AGGREGATE_COLUMNS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in aggregates:
            w.writerow({k: _fmt(v) for k, v in row.items()})
    with open(timing_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=TIMING_COLUMNS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in aggregates:
            w.writerow({k: _fmt(v) for k, v in row.items()})


def _fmt(v):
    return repr(v) if isinstance(v, float) else v
