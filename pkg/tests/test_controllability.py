"""Kalman rank test, Newton-flow corollary, Gaussian rank checks."""

import numpy as np
import pytest

from ctrlgrad.controllability import (
    ControlSystem,
    gaussian_rank_check,
    is_controllable,
    kalman_matrix,
    newton_controllable,
)
from ctrlgrad.errors import DimensionError, InvalidParameterError
from ctrlgrad.quadratic import QuadraticProblem


def _system(A, B, b=None):
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    p = QuadraticProblem(A=A, b=np.zeros(n) if b is None else b)
    return ControlSystem(problem=p, B=np.asarray(B, dtype=float))


def _random_psd(rng, n):
    G = rng.standard_normal((n, n))
    A = G @ G.T / n
    return 0.5 * (A + A.T)


def gram_schmidt_span_dim(vectors, tol=1e-8):
    """Independent oracle: dimension of span by modified Gram-Schmidt."""
    basis = []
    for v in vectors:
        w = v.astype(float).copy()
        scale = np.linalg.norm(w)
        for q in basis:
            w -= (q @ w) * q
        if scale > 0 and np.linalg.norm(w) > tol * scale:
            basis.append(w / np.linalg.norm(w))
    return len(basis)


def test_kalman_matrix_single_column():
    sys = _system(np.diag([1.0, 2.0]), [[1.0], [1.0]])
    np.testing.assert_array_equal(kalman_matrix(sys), [[1.0, -1.0], [1.0, -2.0]])


def test_kalman_matrix_negates_b():
    sys = _system(np.eye(2), [[1.0], [0.0]])
    np.testing.assert_array_equal(kalman_matrix(sys), [[1.0, -1.0], [0.0, 0.0]])


def test_kalman_matrix_zero_drift():
    # (-0)^i B = 0 for i >= 1: all later blocks vanish
    B = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    K = kalman_matrix(_system(np.zeros((3, 3)), B))
    np.testing.assert_array_equal(K[:, :2], B)
    np.testing.assert_array_equal(K[:, 2:], np.zeros((3, 4)))


def test_kalman_block_recurrence_bitwise():
    """block_{i+1} = (-A) @ block_i exactly, by construction."""
    rng = np.random.default_rng(2)
    for _ in range(10):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(1, 4))
        sys = _system(_random_psd(rng, n), rng.standard_normal((n, m)))
        K = kalman_matrix(sys)
        for i in range(n - 1):
            expected = -(sys.problem.A @ K[:, i * m:(i + 1) * m])
            np.testing.assert_array_equal(K[:, (i + 1) * m:(i + 2) * m], expected)


def test_is_controllable_examples():
    assert is_controllable(_system(np.diag([1.0, 2.0]), [[1.0], [1.0]])).controllable
    rep = is_controllable(_system(np.eye(2), [[1.0], [0.0]]))
    assert not rep.controllable and rep.rank == 1
    rng = np.random.default_rng(9)
    A = _random_psd(rng, 4)
    assert is_controllable(_system(A, np.eye(4))).controllable


def test_is_controllable_report_fields():
    rep = is_controllable(_system(np.diag([1.0, 2.0]), [[1.0], [1.0]]))
    assert rep.kalman.shape == (2, 2)
    assert rep.tol_used > 0
    assert rep.controllable == (rep.rank == 2)


def test_is_controllable_rejects_bad_tol():
    sys = _system(np.eye(2), [[1.0], [0.0]])
    with pytest.raises(InvalidParameterError):
        is_controllable(sys, tol_rel=0.0)


def test_agreement_with_gram_schmidt_span():
    """Rank of the Kalman matrix == dimension of span{(-A)^i B e_j}."""
    rng = np.random.default_rng(14)
    for _ in range(40):
        n = int(rng.integers(2, 6))
        m = int(rng.integers(1, 4))
        A = _random_psd(rng, n)
        if rng.uniform() < 0.3:
            # make degenerate directions likely: rank-deficient B
            B = np.outer(rng.standard_normal(n), rng.standard_normal(m))
        else:
            B = rng.standard_normal((n, m))
        sys = _system(A, B)
        rep = is_controllable(sys)
        vectors = []
        blk = B.copy()
        for _ in range(n):
            vectors.extend(blk[:, j] for j in range(m))
            blk = -(A @ blk)
        assert rep.rank == gram_schmidt_span_dim(vectors)


def test_scaling_invariance_of_decision():
    rng = np.random.default_rng(31)
    for _ in range(10):
        n = int(rng.integers(2, 6))
        A = _random_psd(rng, n)
        B = rng.standard_normal((n, int(rng.integers(1, 3))))
        base = is_controllable(_system(A, B)).controllable
        for sigma in (1e-3, 1e3):
            assert is_controllable(_system(A, sigma * B)).controllable == base


def test_newton_controllable_examples():
    assert newton_controllable(np.eye(3))
    assert not newton_controllable(np.zeros((2, 1)))  # m < n forces rank < n
    assert not newton_controllable(np.array([[1.0, 0.0], [1.0, 0.0]]))


def test_newton_matches_identity_drift():
    """newton_controllable(B) == is_controllable with A = I."""
    rng = np.random.default_rng(44)
    for _ in range(50):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 6))
        B = rng.standard_normal((n, m))
        if rng.uniform() < 0.3:
            B[:, : max(1, m // 2)] = 0.0
        sys = _system(np.eye(n), B)
        assert newton_controllable(B) == is_controllable(sys).controllable


def test_control_system_validates_B_rows():
    p = QuadraticProblem(np.eye(2), np.zeros(2))
    with pytest.raises(DimensionError):
        ControlSystem(problem=p, B=np.zeros((3, 1)))


def test_gaussian_rank_check_basic():
    res = gaussian_rank_check(32, 64, 2, seed=1)
    assert res["lower_ok"] and res["upper_ok"]
    assert res["rank"] >= 2


def test_gaussian_rank_check_square_injection():
    # d = n with a square Gaussian B: full rank immediately
    for seed in range(5):
        res = gaussian_rank_check(6, 12, 6, seed=seed)
        assert res["rank"] == 6 and res["controllable"]


def test_gaussian_rank_check_zero_injection():
    res = gaussian_rank_check(4, 8, 1, seed=3, B=np.zeros((4, 1)))
    assert res["rank"] == 0
    assert not res["lower_ok"]


def test_gaussian_rank_check_deterministic():
    a = gaussian_rank_check(8, 16, 2, seed=99)
    b = gaussian_rank_check(8, 16, 2, seed=99)
    assert a == b


def test_gaussian_rank_check_validates():
    with pytest.raises(InvalidParameterError):
        gaussian_rank_check(0, 4, 1, seed=0)
    with pytest.raises(InvalidParameterError):
        gaussian_rank_check(4, 4, 0, seed=0)
