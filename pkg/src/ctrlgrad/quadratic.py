"""Quadratic objectives f(x) = 1/2 <x, Ax> + <b, x> + c with A symmetric PSD.

Construction validates symmetry and positive semidefiniteness (by a
shifted power-iteration eigenvalue estimate), so every QuadraticProblem
in circulation satisfies the model assumptions.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, DimensionError, NoCriticalPointError
from .linalg import as_matrix, as_vector, min_norm_least_squares, smallest_eig_estimate, spectral_norm

__all__ = ["QuadraticProblem", "from_least_squares", "solve_critical"]

_SYM_TOL = 1e-12
_PSD_TOL = 1e-8


@dataclass(eq=False)
class QuadraticProblem:
    """Value objects are treated as immutable after construction."""

    A: np.ndarray
    b: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        self.A = as_matrix(self.A, "A")
        self.b = as_vector(self.b, "b")
        self.c = float(self.c)
        n = self.A.shape[0]
        if self.A.shape[1] != n:
            raise DimensionError(f"A must be square, got shape {self.A.shape}")
        if self.b.shape[0] != n:
            raise DimensionError(f"b has dim {self.b.shape[0]}, expected {n}")
        amax = np.abs(self.A).max() if self.A.size else 0.0
        if np.abs(self.A - self.A.T).max() > _SYM_TOL * (1.0 + amax):
            raise ContractViolationError("A is not symmetric")
        lam_min = smallest_eig_estimate(self.A)
        if lam_min < -_PSD_TOL * spectral_norm(self.A):
            raise ContractViolationError(
                f"A is not positive semidefinite (smallest eigenvalue estimate {lam_min:.3e})"
            )

    @property
    def n(self):
        return self.A.shape[0]

    def value(self, x):
        """f(x) = 1/2 x^T A x + b^T x + c."""
        x = as_vector(x, "x")
        if x.shape[0] != self.n:
            raise DimensionError(f"x has dim {x.shape[0]}, expected {self.n}")
        return float(0.5 * (x @ (self.A @ x)) + self.b @ x + self.c)

    def values(self, X):
        """f evaluated along the rows of X, shape (k, n) -> (k,)."""
        X = np.asarray(X, dtype=float)
        return 0.5 * np.einsum("ij,ij->i", X @ self.A, X) + X @ self.b + self.c

    def gradient(self, x):
        """grad f(x) = Ax + b."""
        x = as_vector(x, "x")
        if x.shape[0] != self.n:
            raise DimensionError(f"x has dim {x.shape[0]}, expected {self.n}")
        return self.A @ x + self.b


def from_least_squares(Bmat, y):
    """Quadratic with value identical to 1/2 ||Bmat x - y||^2.

    Expanding gives A = Bmat^T Bmat, b = -Bmat^T y and constant
    c = 1/2 ||y||^2. The 1/2 on the constant keeps ``value`` equal to the
    residual form exactly (dropping it, as is sometimes done, shifts every
    reported value by 1/2 ||y||^2 without affecting iterates).
    """
    Bmat = as_matrix(Bmat, "Bmat")
    y = as_vector(y, "y")
    if y.shape[0] != Bmat.shape[0]:
        raise DimensionError(f"y has dim {y.shape[0]}, expected {Bmat.shape[0]}")
    A = Bmat.T @ Bmat
    A = 0.5 * (A + A.T)
    return QuadraticProblem(A=A, b=-(Bmat.T @ y), c=0.5 * float(y @ y))


def solve_critical(p):
    """Minimum-norm solution of Ax = -b (the critical points of f).

    Raises NoCriticalPointError when b is not in the range of A beyond
    tolerance, i.e. the quadratic has no stationary point (it is unbounded
    below along some direction of ker(A)).
    """
    x = min_norm_least_squares(p.A, -p.b)
    residual = np.linalg.norm(p.A @ x + p.b)
    if residual > 1e-8 * (1.0 + np.linalg.norm(p.b)):
        raise NoCriticalPointError(
            f"Ax = -b is inconsistent (residual {residual:.3e}); f has no critical point"
        )
    return x
