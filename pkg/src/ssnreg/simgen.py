"""Synthetic sparse-regression data and recovery metrics.

Rows of X are i.i.d. N(0, Sigma) with Sigma_jk = r**|j-k|, drawn through the
AR(1) recursion across columns. The true coefficients have T nonzeros of
the form +-10**u, u ~ U[0, 1], and y = X beta + sigma * eps is formed on the
raw design. Solvers see the design after column normalization (see
``Problem(..., normalize=True)``); coefficients are mapped back with
``beta / problem.scale`` before they are compared with the truth.

Every draw is keyed by an integer seed. A seed is split with
``numpy.random.SeedSequence`` into independent streams for the design, the
signal and the noise, so each piece can be regenerated on its own.
"""
from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class SimConfig:
    n: int
    p: int
    r: float = 0.0
    sigma: float = 0.0
    T: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be positive")
        if not 0 <= self.r < 1:
            raise ValueError(f"r must lie in [0, 1), got {self.r}")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if not 0 <= self.T <= self.p:
            raise ValueError(f"T must lie in [0, p], got {self.T}")

    def with_seed(self, seed):
        return SimConfig(self.n, self.p, self.r, self.sigma, self.T, int(seed))


def _streams(seed):
    design, signal, noise = np.random.SeedSequence(seed).spawn(3)
    return design, signal, noise


def _noise_stream(seed):
    return _streams(seed)[2]


def generate_design(config, normalize=True):
    rng = np.random.default_rng(_streams(config.seed)[0])
    n, p, r = config.n, config.p, config.r
    E = rng.standard_normal((n, p))
    X = np.empty((n, p), order="F")
    X[:, 0] = E[:, 0]
    c = np.sqrt(1.0 - r * r)
    for j in range(1, p):
        X[:, j] = r * X[:, j - 1] + c * E[:, j]
    if normalize:
        X /= np.sqrt(np.einsum("ij,ij->j", X, X))
    return X


def generate_signal(config):
    rng = np.random.default_rng(_streams(config.seed)[1])
    beta = np.zeros(config.p)
    if config.T == 0:
        return beta
    support = rng.choice(config.p, size=config.T, replace=False)
    signs = rng.choice([-1.0, 1.0], size=config.T)
    beta[support] = signs * 10.0 ** rng.uniform(0.0, 1.0, size=config.T)
    return beta


def generate_response(X, beta_dagger, sigma, seed):
    """y = X beta + sigma * eps. ``seed`` is the config seed or a Generator."""
    if isinstance(seed, np.random.Generator):
        rng = seed
    else:
        rng = np.random.default_rng(_noise_stream(seed))
    X = np.asarray(X, dtype=float)
    beta_dagger = np.asarray(beta_dagger, dtype=float)
    if X.shape[1] != beta_dagger.shape[0]:
        raise ValueError("X and beta have incompatible shapes")
    return X @ beta_dagger + sigma * rng.standard_normal(X.shape[0])


def generate(config):
    """Raw ``(X, y, beta_dagger)`` for a config; X is not normalized."""
    X = generate_design(config, normalize=False)
    beta = generate_signal(config)
    y = generate_response(X, beta, config.sigma, config.seed)
    return X, y, beta


@dataclass
class Metrics:
    ms: int
    cm: bool
    ae: float
    re: float
    pe: float
    time: float
    re_absolute: bool = False

    def as_dict(self):
        return asdict(self)


def evaluate_metrics(beta_hat, beta_dagger, X, y, elapsed):
    beta_hat = np.asarray(beta_hat, dtype=float)
    beta_dagger = np.asarray(beta_dagger, dtype=float)
    diff = beta_hat - beta_dagger
    true_norm = np.linalg.norm(beta_dagger)
    err = float(np.linalg.norm(diff))
    return Metrics(
        ms=int(np.count_nonzero(beta_hat)),
        cm=bool(np.array_equal(beta_hat != 0, beta_dagger != 0)),
        ae=float(np.max(np.abs(diff))) if diff.size else 0.0,
        re=err / true_norm if true_norm > 0 else err,
        pe=float(np.linalg.norm(X @ beta_hat - y)),
        time=float(elapsed),
        re_absolute=bool(true_norm == 0),
    )
