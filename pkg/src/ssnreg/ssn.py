"""Semi-smooth Newton solvers for MCP- and SCAD-penalized least squares.

Each Newton step reduces to a linear system on the current active set A,
``(X_A^T X_A - D) beta_A = s_A`` with a diagonal correction D, followed by
closed-form updates of the dual variable. Cost per step is
O(|A|^3 + n p).
"""
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import linalg

from .kkt import (
    REGIME1,
    REGIME2,
    REGIME3,
    PrimalDualState,
    kkt_max_violation,
    partition,
)
from .penalty import Family


class SingularReducedSystem(np.linalg.LinAlgError):
    """Reduced Newton system is not positive definite, even after lifting.

    Usually means the sparse-eigenvalue condition on the active columns
    fails for the chosen gamma.
    """


class OversizedActiveSet(RuntimeError):
    """Active set grew past the identifiability cap (lambda too small)."""


class ReducedSystemWarning(RuntimeWarning):
    pass


class Stop(str, Enum):
    ACTIVE_SET_FIXED = "active_set_fixed"
    ITER_CAP = "iter_cap"
    TOLERANCE = "tolerance"  # coordinate descent: step norm below tol


@dataclass(frozen=True)
class SsnOptions:
    max_iter: int = 1
    ridge_lift: float = 1e-8
    cold_max_iter: int = 50

    def __post_init__(self):
        if self.max_iter < 1 or self.cold_max_iter < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.ridge_lift < 0:
            raise ValueError("ridge_lift must be nonnegative")


@dataclass
class SsnSolution:
    beta: np.ndarray
    d: np.ndarray
    iters: int
    converged_by: Stop
    kkt_inf: float
    active: np.ndarray = None
    lifted: bool = False
    history: list = field(default=None, repr=False)

    @property
    def support(self):
        return np.flatnonzero(self.beta)


def active_cap(n, p):
    """Largest active set a fixed-lambda solve accepts: min(n, 2*floor(n/log p))."""
    if p <= 1:
        return n
    return min(n, 2 * math.floor(n / math.log(p)))


def solve_reduced_system(gram_block, rhs, ridge_lift=1e-8):
    """Solve ``gram_block @ x = rhs`` by Cholesky.

    If the factorization fails, retry once with ``ridge_lift`` times the mean
    diagonal added to the diagonal. Returns ``(x, lifted)``.
    """
    gram_block = np.asarray(gram_block, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    k = rhs.shape[0]
    if k == 0:
        return np.zeros(0), False
    try:
        factor = linalg.cho_factor(gram_block, lower=True, check_finite=False)
        return linalg.cho_solve(factor, rhs, check_finite=False), False
    except linalg.LinAlgError:
        pass
    scale = np.trace(gram_block) / k
    lift = ridge_lift * (scale if scale > 0 else 1.0)
    if lift > 0:
        try:
            factor = linalg.cho_factor(
                gram_block + lift * np.eye(k), lower=True, check_finite=False
            )
        except linalg.LinAlgError:
            pass
        else:
            warnings.warn(
                f"reduced system of size {k} needed a ridge lift of {lift:.3g}",
                ReducedSystemWarning,
                stacklevel=3,
            )
            return linalg.cho_solve(factor, rhs, check_finite=False), True
    raise SingularReducedSystem(
        f"reduced system of size {k} is not positive definite"
    )


def _finish_step(problem, beta, d, XA, beta_A, part):
    """Scatter beta_A and set d_B = y~_B - G_BA beta_A; returns G @ beta."""
    beta[part.A] = beta_A
    gram_beta = problem.X.T @ (XA @ beta_A)
    B = part.B
    d[B] = problem.y_tilde[B] - gram_beta[B]
    return gram_beta


def _check_cap(problem, part):
    cap = active_cap(problem.n, problem.p)
    if part.size > cap:
        raise OversizedActiveSet(
            f"active set of size {part.size} exceeds the cap {cap} (n={problem.n}, p={problem.p})"
        )


def ssn_step_mcp(problem, state, spec, part=None, ridge_lift=1e-8):
    """One Newton step for the MCP KKT system."""
    if spec.family is not Family.MCP:
        raise ValueError("ssn_step_mcp needs an MCP spec")
    if part is None:
        part = partition(state.beta + state.d, spec)
    _check_cap(problem, part)
    lam, g = spec.lam, spec.gamma
    labels = part.labels
    A = part.A
    in_a1 = labels[A] == REGIME1

    beta = np.zeros(problem.p)
    d = state.d.copy()
    d[labels == REGIME2] = 0.0

    s1 = lam * part.signs[A][in_a1]
    XA = problem.X[:, A]
    G_tilde = XA.T @ XA
    G_tilde[np.flatnonzero(in_a1), np.flatnonzero(in_a1)] -= 1.0 / g
    s = problem.y_tilde[A].copy()
    s[in_a1] -= s1
    beta_A, lifted = solve_reduced_system(G_tilde, s, ridge_lift)

    d[A[in_a1]] = -beta_A[in_a1] / g + s1
    gram_beta = _finish_step(problem, beta, d, XA, beta_A, part)
    return PrimalDualState(beta, d, part, state.iter + 1, lifted, gram_beta)


def ssn_step_scad(problem, state, spec, part=None, ridge_lift=1e-8):
    """One Newton step for the SCAD KKT system."""
    if spec.family is not Family.SCAD:
        raise ValueError("ssn_step_scad needs a SCAD spec")
    if part is None:
        part = partition(state.beta + state.d, spec)
    _check_cap(problem, part)
    lam, g = spec.lam, spec.gamma
    labels = part.labels
    A = part.A
    lab_A = labels[A]
    in_a1 = lab_A == REGIME1
    in_a2 = lab_A == REGIME2

    beta = np.zeros(problem.p)
    d = state.d.copy()
    d1 = lam * part.signs[A][in_a1]
    s2 = (g * lam / (g - 1)) * part.signs[A][in_a2]
    d[A[in_a1]] = d1
    d[labels == REGIME3] = 0.0

    XA = problem.X[:, A]
    G_tilde = XA.T @ XA
    idx2 = np.flatnonzero(in_a2)
    G_tilde[idx2, idx2] -= 1.0 / (g - 1)
    s = problem.y_tilde[A].copy()
    s[in_a1] -= d1
    s[in_a2] -= s2
    beta_A, lifted = solve_reduced_system(G_tilde, s, ridge_lift)

    d[A[in_a2]] = -beta_A[in_a2] / (g - 1) + s2
    gram_beta = _finish_step(problem, beta, d, XA, beta_A, part)
    return PrimalDualState(beta, d, part, state.iter + 1, lifted, gram_beta)


def ssn_step(problem, state, spec, part=None, ridge_lift=1e-8):
    if spec.family is Family.MCP:
        return ssn_step_mcp(problem, state, spec, part, ridge_lift)
    return ssn_step_scad(problem, state, spec, part, ridge_lift)


def ssn_solve(problem, spec, init=None, opts=None, max_iter=None, keep_history=False):
    """Run Newton steps until the active partition repeats.

    Parameters
    ----------
    problem : Problem
    spec : PenaltySpec
    init : tuple (beta0, d0), optional
        Defaults to ``(0, X^T y)``, the exact solution for
        ``lam >= max|X^T y|``.
    opts : SsnOptions, optional
    max_iter : int, optional
        Iteration cap. Defaults to ``opts.cold_max_iter`` when no ``init`` is
        given (standalone fit) and ``opts.max_iter`` otherwise.
    keep_history : bool
        Record every iterate ``z = (beta, d)``, starting with the initial one.

    Returns
    -------
    SsnSolution
        ``converged_by`` is ``ACTIVE_SET_FIXED`` when the partition computed
        from the last iterate equals the one used to produce it, which makes
        the iterate a fixed point of the step. Otherwise ``ITER_CAP``,
        including when a 2-cycle of partitions is detected.
    """
    opts = opts or SsnOptions()
    if init is None:
        state = PrimalDualState.initial(problem)
        cap = opts.cold_max_iter if max_iter is None else max_iter
    else:
        beta0, d0 = init
        state = PrimalDualState(np.array(beta0, dtype=float), np.array(d0, dtype=float))
        if state.beta.shape != (problem.p,) or state.d.shape != (problem.p,):
            raise ValueError("initial point has the wrong dimension")
        cap = opts.max_iter if max_iter is None else max_iter
    history = [state.z] if keep_history else None

    part = partition(state.beta + state.d, spec)
    prev_part = None
    lifted = False
    stop = Stop.ITER_CAP
    for _ in range(cap):
        new_state = ssn_step(problem, state, spec, part, opts.ridge_lift)
        lifted = lifted or new_state.lifted
        if keep_history:
            history.append(new_state.z)
        new_part = partition(new_state.beta + new_state.d, spec)
        if new_part.same_as(part):
            state, stop = new_state, Stop.ACTIVE_SET_FIXED
            break
        if new_part.same_as(prev_part):
            # 2-cycle: report whichever of the two iterates has the smaller residual
            if state.iter > 0 and (
                kkt_max_violation(problem, state, spec, state.gram_beta)
                < kkt_max_violation(problem, new_state, spec, new_state.gram_beta)
            ):
                state = PrimalDualState(
                    state.beta, state.d, state.partition, new_state.iter, gram_beta=state.gram_beta
                )
            else:
                state = new_state
            break
        prev_part, part = part, new_part
        state = new_state

    used = state.partition.A if state.partition is not None else np.zeros(0, dtype=int)
    return SsnSolution(
        beta=state.beta,
        d=state.d,
        iters=state.iter,
        converged_by=stop,
        kkt_inf=kkt_max_violation(problem, state, spec, state.gram_beta),
        active=used,
        lifted=lifted,
        history=history,
    )


def convergence_ratios(history, last=3):
    """Error ratios ||z_{k+1} - z*|| / ||z_k - z*|| over the final steps,
    with z* the last iterate. Ratios stop once an error hits zero."""
    zs = np.asarray(history)
    errs = np.linalg.norm(zs - zs[-1], axis=1)
    ratios = []
    for k in range(len(errs) - 1):
        if errs[k] == 0:
            break
        ratios.append(errs[k + 1] / errs[k])
    return ratios[-last:]
