"""Warm-started solution paths and tuning-parameter selection (VSC, HBIC)."""
import math
from dataclasses import dataclass, field

import numpy as np

from .cd import CdOptions, cd_solve
from .penalty import PenaltySpec
from .ssn import SsnOptions, ssn_solve


class EmptySignal(ValueError):
    """X^T y is identically zero, so every lambda gives the zero solution."""


class NoNonzeroSolution(ValueError):
    pass


@dataclass(frozen=True)
class PathOptions:
    alpha: float = 1e-5
    M: int = 100
    J: int = 1
    active_cap: float = 1.0
    ridge_lift: float = 1e-8
    cd_tol: float = 1e-3
    cd_max_iter: int = 10_000

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.M < 1 or self.J < 1:
            raise ValueError("M and J must be >= 1")
        if not self.active_cap > 0:
            raise ValueError("active_cap must be positive")


@dataclass
class PathResult:
    lambdas: np.ndarray
    betas: np.ndarray  # (len(lambdas), p)
    ds: np.ndarray
    iters: np.ndarray
    kkt_inf: np.ndarray
    converged_by: list
    support_size: np.ndarray
    terminated_early: bool
    size_cap: int
    n: int
    p: int
    family: str
    gamma: float
    solver: str
    failure: dict = field(default=None)

    def __len__(self):
        return len(self.lambdas)


@dataclass
class Selection:
    index: int
    lam: float
    beta: np.ndarray
    size: int


def size_cap(n, p, multiplier=1.0):
    """floor(multiplier * n / log p); n when p == 1."""
    if p <= 1:
        return n
    return math.floor(multiplier * n / math.log(p))


def lambda_grid(problem, alpha=1e-5, M=100):
    """Geometric grid lam_t = lam_0 * rho**t, t = 0..M, lam_0 = max|X^T y|."""
    lam0 = problem.lambda_max
    if lam0 == 0:
        raise EmptySignal("X^T y is zero; the solution path is identically zero")
    log_rho = math.log(alpha) / M
    return lam0 * np.exp(log_rho * np.arange(M + 1))


def _solve_at(problem, spec, solver, beta, d, ssn_opts, cd_opts, max_iter=None):
    if solver == "ssn":
        return ssn_solve(problem, spec, init=(beta, d), opts=ssn_opts, max_iter=max_iter)
    if solver == "cd":
        return cd_solve(problem, spec, init=beta, opts=cd_opts)
    raise ValueError(f"unknown solver {solver!r}")


def solve_path(problem, family, gamma, solver="ssn", opts=None):
    """Solve along the decreasing lambda grid, warm-starting each point from
    the previous solution.

    Stops after the first point whose support exceeds
    ``floor(active_cap * n / log p)``. A solver error at some lambda
    truncates the path there; the error is recorded in ``failure``.
    """
    opts = opts or PathOptions()
    lambdas = lambda_grid(problem, opts.alpha, opts.M)
    cap = size_cap(problem.n, problem.p, opts.active_cap)
    template = PenaltySpec.make(family, lambdas[0], gamma)
    ssn_opts = SsnOptions(max_iter=opts.J, ridge_lift=opts.ridge_lift)
    cd_opts = CdOptions(max_iter=opts.cd_max_iter, tol=opts.cd_tol)

    beta = np.zeros(problem.p)
    d = problem.y_tilde.copy()
    betas, ds, iters, kkts, stops, sizes = [], [], [], [], [], []
    terminated, failure = False, None
    for t, lam in enumerate(lambdas):
        spec = template.with_lambda(lam)
        try:
            sol = _solve_at(problem, spec, solver, beta, d, ssn_opts, cd_opts)
        except (ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
            failure = {"index": t, "lambda": float(lam), "error": type(exc).__name__, "message": str(exc)}
            terminated = True
            break
        beta, d = sol.beta, sol.d
        betas.append(beta)
        ds.append(d)
        iters.append(sol.iters)
        kkts.append(sol.kkt_inf)
        stops.append(sol.converged_by.value)
        sizes.append(int(np.count_nonzero(beta)))
        if sizes[-1] > cap:
            terminated = True
            break

    k = len(betas)
    return PathResult(
        lambdas=lambdas[:k],
        betas=np.array(betas).reshape(k, problem.p),
        ds=np.array(ds).reshape(k, problem.p),
        iters=np.array(iters, dtype=int),
        kkt_inf=np.array(kkts),
        converged_by=stops,
        support_size=np.array(sizes, dtype=int),
        terminated_early=terminated,
        size_cap=cap,
        n=problem.n,
        p=problem.p,
        family=template.family.value,
        gamma=template.gamma,
        solver=solver,
        failure=failure,
    )


def fit_lambda(problem, spec, solver="ssn", opts=None, final_max_iter=50):
    """Solve at a single lambda by continuation.

    Walks the same grid as :func:`solve_path` over the points above
    ``spec.lam``, then solves at ``spec.lam`` with ``final_max_iter`` SSN
    steps. At a grid lambda where the path solve converged this reproduces
    the stored path solution exactly.
    """
    opts = opts or PathOptions()
    ssn_opts = SsnOptions(max_iter=opts.J, ridge_lift=opts.ridge_lift)
    cd_opts = CdOptions(max_iter=opts.cd_max_iter, tol=opts.cd_tol)
    beta = np.zeros(problem.p)
    d = problem.y_tilde.copy()
    if problem.lambda_max > 0:
        grid = lambda_grid(problem, opts.alpha, opts.M)
        for lam in grid[grid > spec.lam]:
            sol = _solve_at(problem, spec.with_lambda(lam), solver, beta, d, ssn_opts, cd_opts)
            beta, d = sol.beta, sol.d
    return _solve_at(problem, spec, solver, beta, d, ssn_opts, cd_opts, max_iter=final_max_iter)


def select_vsc(path):
    """Voting selection: the most frequent nonzero support size along the
    path (ties go to the smaller size), then the smallest lambda with it."""
    sizes = path.support_size
    # the lambda_0 point is excluded by construction (size 0)
    valid = (sizes >= 1) & (sizes <= path.size_cap)
    if not np.any(valid):
        raise NoNonzeroSolution("no path point has a support size in [1, cap]")
    counts = np.bincount(sizes[valid], minlength=path.size_cap + 1)
    best = int(np.argmax(counts))
    index = int(np.flatnonzero(sizes == best)[-1])
    return Selection(index, float(path.lambdas[index]), path.betas[index], best)


def hbic(rss, size, n, p):
    """log(RSS/n) + size * log(log n) * log(p) / n."""
    if n < 3:
        raise ValueError("HBIC needs n >= 3")
    rss = max(rss, np.finfo(float).tiny)
    return math.log(rss / n) + size * math.log(math.log(n)) * math.log(p) / n


def select_hbic(path, problem):
    if len(path) == 0:
        raise NoNonzeroSolution("empty path")
    scores = []
    for beta, size in zip(path.betas, path.support_size):
        r = problem.residual(beta)
        scores.append(hbic(float(r @ r), int(size), problem.n, problem.p))
    # argmin returns the first minimum, i.e. the largest lambda on ties
    index = int(np.argmin(scores))
    return Selection(index, float(path.lambdas[index]), path.betas[index], int(path.support_size[index]))
