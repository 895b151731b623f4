"""Problem container, primal-dual state, active-set partitions and the KKT map.

The Gram matrix ``X.T @ X`` is never formed; everything goes through two
matrix-vector products.
"""
from dataclasses import dataclass, field

import numpy as np

from .penalty import Family, threshold

NORM_TOL = 1e-10

# labels used in ActivePartition.labels
INACTIVE, REGIME1, REGIME2, REGIME3 = 0, 1, 2, 3


class Problem:
    """Least-squares data with unit-norm columns and cached ``X.T @ y``.

    Parameters
    ----------
    X : (n, p) array
        Design matrix. Columns must have unit l2 norm unless ``normalize``
        is set, in which case they are rescaled and the factors kept in
        ``scale`` (``beta_raw = beta / scale``).
    y : (n,) array
    """

    def __init__(self, X, y, normalize=False):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).ravel()
        if X.ndim != 2:
            raise ValueError("X must be a 2-d array")
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("X and y must be finite")
        norms = np.sqrt(np.einsum("ij,ij->j", X, X))
        scale = np.ones(X.shape[1])
        if np.any(np.abs(norms - 1.0) > NORM_TOL):
            if not normalize:
                raise ValueError("columns of X must have unit l2 norm")
            if np.any(norms == 0):
                raise ValueError("X has an all-zero column")
            X = X / norms
            scale = norms
        self.X = np.asfortranarray(X)
        self.y = y
        self.y_tilde = self.X.T @ y
        self.scale = scale

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def lambda_max(self):
        return float(np.max(np.abs(self.y_tilde))) if self.p else 0.0

    def gram_apply(self, beta):
        return self.X.T @ (self.X @ beta)

    def residual(self, beta):
        return self.y - self.X @ beta


@dataclass
class ActivePartition:
    """Index sets B, A1, A2 (and A3 for SCAD) over ``range(p)``.

    ``labels[i]`` holds the regime of index i and ``signs`` the sign of
    ``beta + d`` the partition was computed from.
    """

    labels: np.ndarray
    signs: np.ndarray
    family: Family

    @property
    def B(self):
        return np.flatnonzero(self.labels == INACTIVE)

    @property
    def A1(self):
        return np.flatnonzero(self.labels == REGIME1)

    @property
    def A2(self):
        return np.flatnonzero(self.labels == REGIME2)

    @property
    def A3(self):
        return np.flatnonzero(self.labels == REGIME3)

    @property
    def A(self):
        return np.flatnonzero(self.labels != INACTIVE)

    @property
    def size(self):
        return int(np.count_nonzero(self.labels))

    def key(self):
        """Everything the Newton step depends on: regimes and the signs
        that enter the right-hand side."""
        if self.family is Family.MCP:
            signed = self.labels == REGIME1
        else:
            signed = (self.labels == REGIME1) | (self.labels == REGIME2)
        return self.labels.tobytes() + np.where(signed, self.signs, 0).astype(np.int8).tobytes()

    def same_as(self, other):
        return other is not None and self.key() == other.key()


@dataclass
class PrimalDualState:
    beta: np.ndarray
    d: np.ndarray
    partition: ActivePartition = None
    iter: int = 0
    lifted: bool = field(default=False, compare=False)
    # G @ beta as computed by the step that produced this state
    gram_beta: np.ndarray = field(default=None, compare=False, repr=False)

    @classmethod
    def initial(cls, problem):
        return cls(np.zeros(problem.p), problem.y_tilde.copy())

    @property
    def z(self):
        return np.concatenate([self.beta, self.d])


def _check_beta(problem, beta):
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (problem.p,):
        raise ValueError(f"expected a vector of length {problem.p}, got shape {beta.shape}")
    return beta


def dual_from_beta(problem, beta):
    """d = X^T y - X^T X beta."""
    beta = _check_beta(problem, beta)
    return problem.y_tilde - problem.gram_apply(beta)


def partition_mcp(w, spec):
    if spec.family is not Family.MCP:
        raise ValueError("partition_mcp needs an MCP spec")
    w = np.asarray(w, dtype=float)
    a = np.abs(w)
    lam, g = spec.lam, spec.gamma
    labels = np.zeros(w.shape, dtype=np.int8)
    labels[(a > lam) & (a < lam * g)] = REGIME1
    labels[a >= lam * g] = REGIME2
    return ActivePartition(labels, np.sign(w).astype(np.int8), Family.MCP)


def partition_scad(w, spec):
    if spec.family is not Family.SCAD:
        raise ValueError("partition_scad needs a SCAD spec")
    w = np.asarray(w, dtype=float)
    a = np.abs(w)
    lam, g = spec.lam, spec.gamma
    labels = np.zeros(w.shape, dtype=np.int8)
    labels[(a > lam) & (a < 2 * lam)] = REGIME1
    labels[(a >= 2 * lam) & (a < lam * g)] = REGIME2
    labels[a >= lam * g] = REGIME3
    return ActivePartition(labels, np.sign(w).astype(np.int8), Family.SCAD)


def partition(w, spec):
    if spec.family is Family.MCP:
        return partition_mcp(w, spec)
    return partition_scad(w, spec)


def kkt_residual(problem, state, spec, gram_beta=None):
    """F(beta, d) = [beta - T(beta + d); G beta + d - X^T y].

    ``gram_beta`` may pass in an already computed ``G @ beta``.
    """
    beta = _check_beta(problem, state.beta)
    d = _check_beta(problem, state.d)
    top = beta - threshold(beta + d, spec)
    if gram_beta is None:
        gram_beta = problem.gram_apply(beta)
    bottom = gram_beta + d - problem.y_tilde
    return np.concatenate([top, bottom])


def kkt_max_violation(problem, state, spec, gram_beta=None):
    F = kkt_residual(problem, state, spec, gram_beta)
    return float(np.max(np.abs(F))) if F.size else 0.0
