import math

import numpy as np
import pytest

from conftest import random_problem
from ssnreg.kkt import Problem
from ssnreg.path import (
    EmptySignal,
    NoNonzeroSolution,
    PathOptions,
    PathResult,
    fit_lambda,
    hbic,
    lambda_grid,
    select_hbic,
    select_vsc,
    size_cap,
    solve_path,
)
from ssnreg.penalty import PenaltySpec


def fake_path(sizes, cap=10, p=5):
    k = len(sizes)
    betas = np.zeros((k, p))
    for i, s in enumerate(sizes):
        betas[i, :s] = 1.0
    return PathResult(
        lambdas=np.geomspace(1.0, 0.01, k), betas=betas, ds=np.zeros((k, p)),
        iters=np.ones(k, dtype=int), kkt_inf=np.zeros(k), converged_by=["active_set_fixed"] * k,
        support_size=np.array(sizes), terminated_early=False, size_cap=cap, n=20, p=p,
        family="mcp", gamma=2.7, solver="ssn",
    )


def test_lambda_grid():
    X = np.eye(3)
    P = Problem(X, np.array([2.0, -4.0, 1.0]))
    g = lambda_grid(P, alpha=1e-2, M=2)
    assert np.allclose(g, [4.0, 0.4, 0.04])
    assert g[0] == 4.0
    assert len(lambda_grid(P)) == 101
    with pytest.raises(EmptySignal):
        lambda_grid(Problem(X, np.zeros(3)))


def test_size_cap():
    assert size_cap(200, 1000) == math.floor(200 / math.log(1000)) == 28
    assert size_cap(10, 1) == 10
    assert size_cap(200, 1000, 0.5) == 14


def test_path_options_validation():
    for kw in [dict(alpha=1.0), dict(alpha=0.0), dict(M=0), dict(J=0), dict(active_cap=0)]:
        with pytest.raises(ValueError):
            PathOptions(**kw)


class TestVsc:
    def test_mode_then_smallest_lambda(self):
        sel = select_vsc(fake_path([0, 1, 2, 2, 2, 3, 3]))
        assert sel.size == 2 and sel.index == 4

    def test_tie_goes_to_smaller_size(self):
        sel = select_vsc(fake_path([0, 1, 1, 3, 3]))
        assert sel.size == 1 and sel.index == 2

    def test_sizes_over_cap_ignored(self):
        sel = select_vsc(fake_path([0, 1, 4, 4, 4], cap=3))
        assert sel.size == 1

    def test_no_nonzero(self):
        with pytest.raises(NoNonzeroSolution):
            select_vsc(fake_path([0, 0]))


def test_hbic_formula():
    assert hbic(2.0, 3, 10, 100) == pytest.approx(
        math.log(0.2) + 3 * math.log(math.log(10)) * math.log(100) / 10
    )
    with pytest.raises(ValueError):
        hbic(1.0, 1, 2, 5)
    assert np.isfinite(hbic(0.0, 1, 10, 5))


def test_select_hbic_small():
    # n = 8, p = 4, one strong coefficient
    rng = np.random.default_rng(0)
    while True:
        X = rng.standard_normal((8, 4))
        X /= np.linalg.norm(X, axis=0)
        # keep the reduced systems positive definite for gamma = 2.7
        if np.linalg.eigvalsh(X.T @ X)[0] > 0.5:
            break
    y = 5 * X[:, 2] + 0.01 * rng.standard_normal(8)
    P = Problem(X, y)
    path = solve_path(P, "mcp", 2.7, opts=PathOptions(M=30))
    sel = select_hbic(path, P)
    assert np.flatnonzero(sel.beta).tolist() == [2]
    with pytest.raises(NoNonzeroSolution):
        select_hbic(fake_path([], p=4), P)


@pytest.mark.parametrize("solver", ["ssn", "cd"])
@pytest.mark.parametrize("family", ["mcp", "scad"])
def test_path_recovers_support(sim_small, solver, family):
    P, beta_true = sim_small
    path = solve_path(P, family, None, solver, PathOptions(M=60, J=3))
    assert path.support_size[0] == 0
    assert np.all(np.diff(path.lambdas) < 0)
    failed = path.failure is not None
    assert path.terminated_early == (failed or path.support_size[-1] > path.size_cap)
    sel = select_vsc(path)
    assert np.array_equal(np.flatnonzero(sel.beta), np.flatnonzero(beta_true))
    if failed:
        # a failure can only truncate the path below the selected plateau
        assert path.failure["index"] == len(path) > sel.index


def test_path_truncates_on_solver_error(rng):
    # alpha tiny on a p >> n problem: the final points blow the active-set cap
    P, _ = random_problem(rng, 20, 400, T=1)
    path = solve_path(P, "mcp", None, opts=PathOptions(M=10, alpha=1e-8, active_cap=50))
    assert path.terminated_early
    assert path.failure is None or path.failure["error"] in {"OversizedActiveSet", "SingularReducedSystem"}


def test_unknown_solver(sim_small):
    with pytest.raises(ValueError):
        solve_path(sim_small[0], "mcp", None, "lbfgs")


@pytest.mark.parametrize("J", [1, 3])
def test_fit_lambda_reproduces_path_point(sim_small, J):
    P, _ = sim_small
    opts = PathOptions(M=50, J=J)
    path = solve_path(P, "scad", None, opts=opts)
    sel = select_vsc(path)
    assert path.converged_by[sel.index] == "active_set_fixed"
    sol = fit_lambda(P, PenaltySpec.make("scad", sel.lam), opts=opts)
    assert np.array_equal(sol.beta, sel.beta)


def test_fit_lambda_above_max_is_zero(sim_small):
    P, _ = sim_small
    sol = fit_lambda(P, PenaltySpec.make("mcp", 2 * P.lambda_max))
    assert not sol.beta.any()
