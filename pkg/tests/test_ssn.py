import warnings

import numpy as np
import pytest

from conftest import random_problem
from ssnreg.kkt import PrimalDualState, Problem, partition
from ssnreg.path import fit_lambda
from ssnreg.penalty import PenaltySpec, threshold
from ssnreg.ssn import (
    OversizedActiveSet,
    ReducedSystemWarning,
    SingularReducedSystem,
    SsnOptions,
    Stop,
    active_cap,
    convergence_ratios,
    solve_reduced_system,
    ssn_solve,
    ssn_step,
    ssn_step_mcp,
    ssn_step_scad,
)


def test_active_cap():
    assert active_cap(200, 1000) == min(200, 2 * int(200 / np.log(1000)))
    assert active_cap(5, 1) == 5
    assert active_cap(10, 2) == 10


class TestReducedSystem:
    def test_spd(self):
        A = np.array([[2.0, 0.5], [0.5, 1.0]])
        x, lifted = solve_reduced_system(A, np.array([1.0, 2.0]))
        assert np.allclose(A @ x, [1.0, 2.0]) and not lifted

    def test_empty(self):
        x, lifted = solve_reduced_system(np.zeros((0, 0)), np.zeros(0))
        assert x.shape == (0,) and not lifted

    def test_singular_psd_is_lifted(self):
        A = np.ones((2, 2))
        with pytest.warns(ReducedSystemWarning):
            x, lifted = solve_reduced_system(A, np.array([1.0, 1.0]))
        assert lifted and np.all(np.isfinite(x))

    def test_indefinite_raises(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            with pytest.raises(SingularReducedSystem):
                solve_reduced_system(np.diag([1.0, -1.0]), np.ones(2))

    def test_no_lift_raises(self):
        with pytest.raises(SingularReducedSystem):
            solve_reduced_system(np.ones((2, 2)), np.ones(2), ridge_lift=0.0)


@pytest.mark.parametrize("family", ["mcp", "scad"])
def test_orthonormal_one_step(rng, family):
    P, _ = random_problem(rng, 30, 30, T=4, orthonormal=True)
    spec = PenaltySpec.make(family, 1.0)
    sol = ssn_solve(P, spec)
    # with G = I the minimizer is the scalar threshold of X^T y
    assert np.allclose(sol.beta, threshold(P.y_tilde, spec), atol=1e-12)
    assert sol.converged_by is Stop.ACTIVE_SET_FIXED
    assert sol.iters == 1
    assert sol.kkt_inf < 1e-12


def test_hand_example_mcp():
    # two orthogonal columns, y~ = (3, 0.5), lam = 1, gamma = 3
    X = np.eye(2)
    P = Problem(X, np.array([3.0, 0.5]))
    spec = PenaltySpec.make("mcp", 1.0, 3.0)
    sol = ssn_solve(P, spec)
    assert np.array_equal(sol.beta, [3.0, 0.0])
    assert np.allclose(sol.d, [0.0, 0.5])
    # regime-1 coordinate
    P = Problem(X, np.array([2.0, 0.5]))
    sol = ssn_solve(P, spec)
    assert np.allclose(sol.beta, [1.5, 0.0])
    assert np.allclose(sol.d, [0.5, 0.5])


@pytest.mark.parametrize("family", ["mcp", "scad"])
def test_fixed_point_and_complementarity(rng, family):
    P, beta_true = random_problem(rng, 60, 120, T=3)
    spec = PenaltySpec.make(family, 0.5)
    sol = fit_lambda(P, spec)
    assert sol.converged_by is Stop.ACTIVE_SET_FIXED
    assert sol.kkt_inf < 1e-8
    assert np.array_equal(sol.support, np.flatnonzero(beta_true))
    G = P.X.T @ P.X
    assert np.allclose(G @ sol.beta + sol.d, P.y_tilde, atol=1e-10)
    assert np.allclose(sol.beta, threshold(sol.beta + sol.d, spec), atol=1e-10)
    # another step from the fixed point changes nothing
    again = ssn_step(P, PrimalDualState(sol.beta, sol.d), spec)
    assert np.allclose(again.beta, sol.beta, atol=1e-12)


def test_step_family_checks(rng):
    P, _ = random_problem(rng, 5, 5)
    s = PrimalDualState.initial(P)
    with pytest.raises(ValueError):
        ssn_step_mcp(P, s, PenaltySpec.make("scad", 1.0))
    with pytest.raises(ValueError):
        ssn_step_scad(P, s, PenaltySpec.make("mcp", 1.0))


def test_oversized_active_set(rng):
    P, _ = random_problem(rng, 20, 200, T=2)
    spec = PenaltySpec.make("mcp", 1e-6)
    with pytest.raises(OversizedActiveSet):
        ssn_solve(P, spec)


def test_warm_start_iteration_cap(rng):
    P, _ = random_problem(rng, 40, 80, T=3)
    spec = PenaltySpec.make("scad", 1.5)
    sol = ssn_solve(P, spec, init=(np.zeros(80), P.y_tilde), opts=SsnOptions(max_iter=1))
    assert sol.iters == 1
    with pytest.raises(ValueError):
        ssn_solve(P, spec, init=(np.zeros(3), np.zeros(3)))
    with pytest.raises(ValueError):
        SsnOptions(max_iter=0)


def test_large_lambda_gives_zero(rng):
    P, _ = random_problem(rng, 10, 20)
    sol = ssn_solve(P, PenaltySpec.make("mcp", P.lambda_max * 1.01))
    assert not sol.beta.any()
    assert sol.converged_by is Stop.ACTIVE_SET_FIXED


def test_history_and_ratios(rng):
    P, _ = random_problem(rng, 30, 30, T=3, orthonormal=True)
    spec = PenaltySpec.make("mcp", 1.0)
    b0 = rng.standard_normal(30)
    sol = ssn_solve(P, spec, init=(b0, rng.standard_normal(30)), max_iter=10, keep_history=True)
    assert len(sol.history) == sol.iters + 1
    r = convergence_ratios(sol.history)
    assert all(x < 1 for x in r)
    assert convergence_ratios([np.ones(2), np.ones(2)]) == []


def test_partition_of_result_matches(rng):
    P, _ = random_problem(rng, 50, 100, T=3)
    spec = PenaltySpec.make("mcp", 0.4)
    sol = fit_lambda(P, spec)
    part = partition(sol.beta + sol.d, spec)
    assert np.array_equal(part.A, sol.active)
