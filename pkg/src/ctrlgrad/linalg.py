"""Dense real linear algebra used throughout the package.

Everything operates on plain float64 numpy arrays. The routines here are
deliberately elementary: a scaling-and-squaring matrix exponential, the
Faddeev-LeVerrier characteristic polynomial, SVD-based numerical rank and
minimum-norm least squares, a Cholesky shifted solve, and power iteration
for extremal singular/eigen values.
"""

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ContractViolationError, DimensionError, UnsupportedSizeError

__all__ = [
    "as_matrix",
    "as_vector",
    "mat_exp",
    "char_poly",
    "matrix_poly",
    "numerical_rank",
    "default_rank_tol",
    "solve_shifted_spd",
    "spectral_norm",
    "smallest_eig_estimate",
    "min_norm_least_squares",
]

#: Taylor terms below this max-abs threshold are dropped from the exponential.
_EXP_TERM_CUTOFF = 1e-18

#: Relative accuracy target and iteration cap for power iteration.
_POWER_TOL = 1e-8
_POWER_MAX_ITERS = 10_000


def as_matrix(a, name="matrix"):
    """Coerce to a finite, C-contiguous float64 2-D array."""
    M = np.ascontiguousarray(a, dtype=float)
    if M.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got shape {M.shape}")
    if M.size and not np.isfinite(M).all():
        raise ContractViolationError(f"{name} contains non-finite entries")
    return M


def as_vector(a, name="vector"):
    """Coerce to a finite, contiguous float64 1-D array."""
    v = np.ascontiguousarray(a, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be 1-dimensional, got shape {v.shape}")
    if v.size and not np.isfinite(v).all():
        raise ContractViolationError(f"{name} contains non-finite entries")
    return v


def _require_square(M, name="matrix"):
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")


def mat_exp(A, t=1.0):
    """Matrix exponential e^{tA} by scaling and squaring.

    The scaled matrix tA/2^s is brought to Frobenius norm <= 0.5, the power
    series is summed until the next term falls below 1e-18 in max-abs, and
    the result is squared s times. Accuracy is limited only by rounding for
    the matrix sizes supported here (n <= 1024).

    Parameters
    ----------
    A : (n, n) array
    t : float
        Time/scale factor multiplying A before exponentiation.

    Returns
    -------
    (n, n) ndarray with e^{tA}.
    """
    A = as_matrix(A, "A")
    _require_square(A, "A")
    if not np.isfinite(t):
        raise ValueError(f"t must be finite, got {t}")
    n = A.shape[0]
    M = t * A
    norm = np.linalg.norm(M, "fro")
    s = 0
    if norm > 0.5:
        s = int(np.ceil(np.log2(norm / 0.5)))
        M = M / (2.0**s)
    E = np.eye(n) + M
    term = M.copy()
    k = 1
    # ||M|| <= 0.5 makes the series drop below 1e-18 within ~20 terms
    while np.abs(term).max() >= _EXP_TERM_CUTOFF:
        k += 1
        term = term @ M / k
        E += term
    for _ in range(s):
        E = E @ E
    return E


def char_poly(A):
    """Monic characteristic polynomial det(lambda*I - A).

    Computed with the Faddeev-LeVerrier recurrence

        M_1 = I,            c_{n-1} = -tr(A M_1)
        M_k = A M_{k-1} + c_{n-k+1} I,   c_{n-k} = -tr(A M_k)/k

    Parameters
    ----------
    A : (n, n) array with n <= 64. Beyond that the coefficients overflow
        the double range for generic matrices and the input is rejected.

    Returns
    -------
    (n+1,) ndarray of coefficients in ascending order: c[i] multiplies
    lambda^i, and c[n] == 1.0.
    """
    A = as_matrix(A, "A")
    _require_square(A, "A")
    n = A.shape[0]
    if n > 64:
        raise UnsupportedSizeError(f"char_poly supports n <= 64, got n = {n}")
    coeffs = np.zeros(n + 1)
    coeffs[n] = 1.0
    M = np.zeros((n, n))
    I = np.eye(n)
    for k in range(1, n + 1):
        M = A @ M + coeffs[n - k + 1] * I
        coeffs[n - k] = -np.trace(A @ M) / k
    return coeffs


def matrix_poly(coeffs, A):
    """Evaluate sum_i coeffs[i] * A^i by Horner's scheme."""
    A = as_matrix(A, "A")
    _require_square(A, "A")
    n = A.shape[0]
    P = np.zeros((n, n))
    I = np.eye(n)
    for c in reversed(np.asarray(coeffs, dtype=float)):
        P = P @ A + c * I
    return P


def default_rank_tol(shape):
    """Default relative rank tolerance: max(shape) * eps * 1e3."""
    return max(shape) * np.finfo(float).eps * 1e3


def numerical_rank(M, tol_rel=None):
    """Number of singular values above tol_rel times the largest one.

    Singular values come from LAPACK's bidiagonalization SVD. A zero
    matrix has rank 0. ``tol_rel`` defaults to max(shape)*eps*1e3.
    """
    M = as_matrix(M, "M")
    if tol_rel is None:
        tol_rel = default_rank_tol(M.shape)
    if tol_rel <= 0:
        raise ValueError(f"tol_rel must be positive, got {tol_rel}")
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > tol_rel * sv[0]))


def solve_shifted_spd(A, gamma, rhs):
    """Solve (I + gamma*A) x = rhs for symmetric PSD A via Cholesky.

    The shifted matrix is symmetric positive definite for any gamma > 0,
    so a Cholesky factorization always applies. The residual is checked
    against 1e-10*(1+||rhs||) after the solve.
    """
    A = as_matrix(A, "A")
    _require_square(A, "A")
    rhs = as_vector(rhs, "rhs")
    if rhs.shape[0] != A.shape[0]:
        raise DimensionError(f"rhs has dim {rhs.shape[0]}, expected {A.shape[0]}")
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    amax = np.abs(A).max() if A.size else 0.0
    if A.size and np.abs(A - A.T).max() > 1e-12 * amax:
        raise ContractViolationError("A is not symmetric")
    S = np.eye(A.shape[0]) + gamma * A
    x = cho_solve(cho_factor(S), rhs)
    residual = np.linalg.norm(S @ x - rhs)
    if residual > 1e-10 * (1.0 + np.linalg.norm(rhs)):
        raise ContractViolationError(
            f"shifted solve residual {residual:.3e} exceeds contract bound"
        )
    return x


def _power_largest(matvec, n, tol=_POWER_TOL, max_iters=_POWER_MAX_ITERS):
    """Largest eigenvalue of a symmetric PSD operator given by matvec.

    Converged when the eigen-residual ||Sv - rho*v|| <= tol*rho. Returns the
    final Rayleigh quotient estimate if the cap is reached (documented
    best-effort behavior; the cap is generous for the sizes used here).
    """
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    rho = 0.0
    for _ in range(max_iters):
        w = matvec(v)
        rho = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        if np.linalg.norm(w - rho * v) <= tol * max(rho, nw):
            return rho
        v = w / nw
    return rho


def spectral_norm(M):
    """Largest singular value via power iteration on M^T M.

    Relative accuracy 1e-8 with a 10000 iteration cap.
    """
    M = as_matrix(M, "M")
    if M.size == 0 or not M.any():
        return 0.0
    lam = _power_largest(lambda v: M.T @ (M @ v), M.shape[1])
    return float(np.sqrt(max(lam, 0.0)))


def smallest_eig_estimate(A):
    """Estimate of the smallest eigenvalue of a symmetric matrix.

    Power iteration on the shifted matrix sigma*I - A (PSD, largest
    eigenvalue sigma - lambda_min) with sigma = ||A||.
    """
    A = as_matrix(A, "A")
    _require_square(A, "A")
    if A.size == 0 or not A.any():
        return 0.0
    sigma = spectral_norm(A)
    mu = _power_largest(lambda v: sigma * v - A @ v, A.shape[0])
    return float(sigma - mu)


def min_norm_least_squares(M, rhs):
    """Minimum-Euclidean-norm minimizer of ||Mx - rhs||.

    SVD-based pseudo-inverse solve (numpy lstsq).
    """
    M = as_matrix(M, "M")
    rhs = as_vector(rhs, "rhs")
    if rhs.shape[0] != M.shape[0]:
        raise DimensionError(f"rhs has dim {rhs.shape[0]}, expected {M.shape[0]}")
    x, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return x
