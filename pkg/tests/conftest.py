import numpy as np
import pytest

from ssnreg import Problem, SimConfig, generate


def random_problem(rng, n, p, T=2, sigma=0.01, orthonormal=False):
    """Unit-norm design with a T-sparse signal; returns (problem, beta_true)."""
    if orthonormal:
        X, _ = np.linalg.qr(rng.standard_normal((n, p)))
    else:
        X = rng.standard_normal((n, p))
        X /= np.linalg.norm(X, axis=0)
    beta = np.zeros(p)
    if T:
        idx = rng.choice(p, size=T, replace=False)
        beta[idx] = rng.choice([-1.0, 1.0], T) * rng.uniform(2.0, 5.0, T)
    y = X @ beta + sigma * rng.standard_normal(n)
    return Problem(X, y), beta


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def sim_small():
    """A small correlated instance used by several modules."""
    X, y, beta = generate(SimConfig(n=80, p=300, r=0.3, sigma=0.05, T=5, seed=7))
    return Problem(X, y, normalize=True), beta


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
