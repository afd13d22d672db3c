import numpy as np
import pytest

from sharpspec.lanczos import lanczos


def test_largest_of_diagonal():
    res = lanczos(np.diag(np.arange(1.0, 11.0)), 3, which="LA")
    np.testing.assert_allclose(res.eigenvalues, [8, 9, 10], atol=1e-8)
    assert res.converged


def test_degenerate_cluster_found():
    res = lanczos(np.diag([2.0, 2.0, 1.0]), 2, which="LA", block_size=2)
    assert res.clusters()[0] == (pytest.approx(2.0), 2)


def test_largest_magnitude_both_signs():
    d = np.concatenate([np.linspace(-5, -1, 40), np.linspace(0.5, 4, 60)])
    res = lanczos(np.diag(d), 4, which="LM")
    expected = np.sort(d[np.argsort(-np.abs(d))[:4]])
    np.testing.assert_allclose(np.sort(res.eigenvalues), expected, atol=1e-8)


def test_residuals_verified_and_seed_deterministic():
    rng = np.random.default_rng(3)
    Q, _ = np.linalg.qr(rng.standard_normal((400, 400)))
    A = Q @ np.diag(1.0 / np.arange(1, 401)) @ Q.T
    a = lanczos(A, 10, tol=1e-10, seed=5)
    b = lanczos(A, 10, tol=1e-10, seed=5)
    np.testing.assert_array_equal(a.eigenvalues, b.eigenvalues)
    assert np.all(a.residuals <= 1e-10 * a.metadata["norm_estimate"])
    V = a.vectors
    np.testing.assert_allclose(A @ V, V * a.eigenvalues, atol=1e-9)
