import numpy as np
import pytest

from ssnreg.simgen import (
    SimConfig,
    evaluate_metrics,
    generate,
    generate_design,
    generate_response,
    generate_signal,
)


def test_config_validation():
    for kw in [dict(n=0, p=5), dict(n=5, p=5, r=1.0), dict(n=5, p=5, r=-0.1),
               dict(n=5, p=5, sigma=-1), dict(n=5, p=5, T=6)]:
        with pytest.raises(ValueError):
            SimConfig(**kw)
    assert SimConfig(5, 5).with_seed(9).seed == 9


def test_deterministic_and_seed_sensitive():
    c = SimConfig(n=30, p=40, r=0.5, sigma=0.1, T=3, seed=11)
    a, b = generate(c), generate(c)
    for u, v in zip(a, b):
        assert np.array_equal(u, v)
    assert not np.array_equal(generate(c.with_seed(12))[0], a[0])


def test_streams_are_independent():
    c = SimConfig(n=30, p=40, r=0.5, sigma=0.1, T=3, seed=11)
    # the design does not depend on T or sigma
    assert np.array_equal(generate_design(c), generate_design(SimConfig(30, 40, 0.5, 2.0, 10, 11)))


def test_design_normalization():
    c = SimConfig(n=50, p=20, r=0.3, seed=1)
    assert np.allclose(np.linalg.norm(generate_design(c), axis=0), 1.0)
    raw = generate_design(c, normalize=False)
    assert np.allclose(raw / np.linalg.norm(raw, axis=0), generate_design(c))


def test_ar1_correlation():
    c = SimConfig(n=20000, p=6, r=0.7, seed=2)
    C = np.corrcoef(generate_design(c, normalize=False), rowvar=False)
    assert C[0, 1] == pytest.approx(0.7, abs=0.02)
    assert C[0, 2] == pytest.approx(0.49, abs=0.02)
    assert np.var(generate_design(c, normalize=False)[:, 5]) == pytest.approx(1.0, abs=0.05)


def test_signal():
    b = generate_signal(SimConfig(n=10, p=100, T=7, seed=4))
    nz = b[b != 0]
    assert len(nz) == 7
    assert np.all((np.abs(nz) >= 1) & (np.abs(nz) <= 10))
    assert not generate_signal(SimConfig(n=10, p=10, T=0)).any()


def test_response_noise_free():
    X, y, beta = generate(SimConfig(n=10, p=15, sigma=0.0, T=2, seed=3))
    assert np.allclose(y, X @ beta)
    y2 = generate_response(X, beta, 1.0, np.random.default_rng(0))
    assert y2.shape == (10,)
    with pytest.raises(ValueError):
        generate_response(X, np.zeros(3), 1.0, 0)


def test_metrics():
    X = np.eye(3)
    truth = np.array([1.0, 0.0, -2.0])
    m = evaluate_metrics(np.array([1.1, 0.0, -2.0]), truth, X, truth, 0.5)
    assert m.ms == 2 and m.cm
    assert m.ae == pytest.approx(0.1)
    assert m.re == pytest.approx(0.1 / np.sqrt(5))
    assert m.pe == pytest.approx(0.1)
    assert m.time == 0.5 and not m.re_absolute
    m = evaluate_metrics(np.array([0.5, 0, 0]), np.zeros(3), X, np.zeros(3), 0.0)
    assert m.re_absolute and m.re == pytest.approx(0.5) and not m.cm
    assert set(m.as_dict()) >= {"ms", "cm", "ae", "re", "pe", "time"}
