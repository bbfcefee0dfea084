import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from nm01.linsys import (BlockDiagonal, Dense, Diagonal, SingularSystemError, saddle_residual,
                         solve_saddle, spectral_norm_estimate)


def test_scalar_saddle_example():
    u, v = solve_saddle(Diagonal(np.array([2.0])), np.array([[1.0]]), 0.0, [-4.0], [-1.0])
    np.testing.assert_allclose(u, [-1.0], atol=1e-14)
    np.testing.assert_allclose(v, [-2.0], atol=1e-14)


def test_empty_active_set_is_plain_hessian_solve():
    h = np.array([2.0, 4.0, 0.5])
    rhs = np.array([1.0, -2.0, 3.0])
    u, v = solve_saddle(Diagonal(h), np.zeros((0, 3)), 0.7, rhs, np.zeros(0))
    np.testing.assert_allclose(u, rhs / h)
    assert v.size == 0


def test_identity_with_perturbation():
    u, v = solve_saddle(Diagonal(np.ones(2)), np.eye(2), 1.0, [2.0, 0.0], [0.0, 2.0])
    np.testing.assert_allclose(u, [1.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(v, [1.0, -1.0], atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 30), st.integers(0, 12),
       st.sampled_from([0.0, 1e-3, 0.5]), st.booleans())
def test_schur_and_full_agree(seed, n, t, mu, sparse):
    rng = np.random.default_rng(seed)
    t = min(t, n)
    A = rng.standard_normal((t, n))
    if sparse:
        A = sp.csr_matrix(A)
    h = rng.uniform(0.5, 3.0, n) * rng.choice([-1.0, 1.0], n)
    rx, rt = rng.standard_normal(n), rng.standard_normal(t)
    u1, v1 = solve_saddle(Diagonal(h), A, mu, rx, rt, method="schur")
    u2, v2 = solve_saddle(Dense(np.diag(h)), A, mu, rx, rt, method="full")
    assert saddle_residual(Diagonal(h), A, mu, u1, v1, rx, rt) <= 1e-10
    assert saddle_residual(Diagonal(h), A, mu, u2, v2, rx, rt) <= 1e-10
    scale = max(1.0, np.linalg.norm(np.concatenate([u2, v2])))
    assert np.linalg.norm(np.concatenate([u1 - u2, v1 - v2])) / scale <= 1e-8


def test_block_diagonal_hessian():
    B1 = np.array([[2.0, 0.5], [0.5, 1.0]])
    H = BlockDiagonal((B1, np.array([[3.0]])), ((0, 2), (2, 3)))
    A = np.array([[1.0, 1.0, 1.0]])
    rx, rt = np.array([1.0, 0.0, -1.0]), np.array([0.5])
    u, v = solve_saddle(H, A, 0.0, rx, rt)
    assert saddle_residual(H, A, 0.0, u, v, rx, rt) <= 1e-10
    np.testing.assert_allclose(H.matvec(np.ones(3)), H.to_dense() @ np.ones(3))


def test_block_ranges_must_cover():
    with pytest.raises(ValueError):
        BlockDiagonal((np.eye(2),), ((1, 3),))
    with pytest.raises(ValueError):
        BlockDiagonal((np.eye(2),), ((0, 3),))


def test_dense_must_be_symmetric():
    with pytest.raises(ValueError):
        Dense(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_validation():
    with pytest.raises(ValueError):
        solve_saddle(Diagonal(np.ones(2)), np.eye(2), -1.0, np.ones(2), np.ones(2))
    with pytest.raises(ValueError):
        solve_saddle(Diagonal(np.ones(2)), np.eye(2), 0.0, np.ones(3), np.ones(2))
    with pytest.raises(SingularSystemError):
        solve_saddle(Diagonal(np.array([1.0, 0.0])), np.eye(2), 0.0, np.ones(2), np.ones(2), method="schur")


def test_singular_system_raises():
    # repeated rows with mu = 0 and a zero Hessian: no solution to factor
    A = np.array([[1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(SingularSystemError):
        solve_saddle(Dense(np.zeros((2, 2))), A, 0.0, np.ones(2), np.array([1.0, 2.0]))


@pytest.mark.parametrize("A, sigma", [
    (np.diag([3.0, 1.0]), 3.0),
    (np.array([[0.0, 2.0], [0.0, 0.0]]), 2.0),
    (np.eye(4), 1.0),
])
def test_spectral_norm_examples(A, sigma):
    est, ok = spectral_norm_estimate(A, return_info=True)
    assert ok
    assert est == pytest.approx(sigma, rel=1e-5)


def test_spectral_norm_sparse_and_empty():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((40, 15))
    assert spectral_norm_estimate(sp.csr_matrix(A), tol=1e-10) == pytest.approx(np.linalg.norm(A, 2), rel=1e-6)
    assert spectral_norm_estimate(np.zeros((0, 3))) == 0.0
    with pytest.raises(ValueError):
        spectral_norm_estimate(A, max_iters=0)
