"""Controllability of the pair (-A, B): Kalman rank test and the Gaussian lemma check.

The controlled flow has drift matrix -A, so the controllability matrix is

    [B | (-A)B | (-A)^2 B | ... | (-A)^{n-1} B]

Controllability of (-A, B) and of (A, B) coincide (the blocks differ only
by sign), but blocks here are built with -A so that individual columns
match the flow actually integrated.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidParameterError
from .linalg import as_matrix, default_rank_tol, numerical_rank
from .quadratic import QuadraticProblem

__all__ = [
    "ControlSystem",
    "ControllabilityReport",
    "kalman_matrix",
    "is_controllable",
    "newton_controllable",
    "gaussian_rank_check",
]


@dataclass(eq=False)
class ControlSystem:
    """A quadratic objective together with an input matrix B (n x m)."""

    problem: QuadraticProblem
    B: np.ndarray

    def __post_init__(self):
        self.B = as_matrix(self.B, "B")
        if self.B.shape[0] != self.problem.n:
            raise DimensionError(
                f"B has {self.B.shape[0]} rows, expected {self.problem.n}"
            )

    @property
    def n(self):
        return self.problem.n

    @property
    def m(self):
        return self.B.shape[1]


@dataclass(eq=False)
class ControllabilityReport:
    kalman: np.ndarray
    rank: int
    controllable: bool
    tol_used: float


def kalman_matrix(sys):
    """n x (n*m) block matrix [B, (-A)B, ..., (-A)^{n-1}B].

    Blocks are generated by repeated multiplication (block_{k+1} = (-A) @ block_k),
    never by forming matrix powers from scratch; the k-th block is therefore
    bitwise equal to (-A) applied k times to B.
    """
    A = sys.problem.A
    B = sys.B
    n, m = B.shape
    blocks = np.empty((n, n * m))
    blk = B
    for k in range(n):
        blocks[:, k * m : (k + 1) * m] = blk
        if k + 1 < n:
            blk = -(A @ blk)
    return blocks


def is_controllable(sys, tol_rel=None):
    K = kalman_matrix(sys)
    if tol_rel is None:
        tol_rel = default_rank_tol(K.shape)
    if tol_rel <= 0:
        raise InvalidParameterError(f"tol_rel must be positive, got {tol_rel}")
    r = numerical_rank(K, tol_rel)
    return ControllabilityReport(
        kalman=K, rank=r, controllable=(r == sys.n), tol_used=float(tol_rel)
    )


def newton_controllable(B):
    """Rank test on B alone: can a single control step reach every direction?

    Equivalent to the full Kalman test with A replaced by the identity,
    since then every block is +/-B and adds no new columns. rank(B) = n
    means the control term spans the whole state space, which is exactly
    the regime where one controlled step can jump to the minimizer.
    """
    B = as_matrix(B, "B")
    return numerical_rank(B, default_rank_tol(B.shape)) == B.shape[0]


def gaussian_rank_check(n, m, d, seed, B=None):
    """Draw a Wishart objective A = G^T G / m and Gaussian B, report the Kalman rank.

    Draw order under ``default_rng(seed)``: first G of shape (m, n) via
    ``standard_normal``, then B of shape (n, d) via ``standard_normal``.
    Passing ``B`` explicitly skips the second draw (the first still happens,
    so A is unchanged); this is how degenerate inputs are injected in tests.

    Returns a dict with the observed rank and whether the structural bounds
    d <= rank <= min(n, n*d) hold. The upper bound caps the column count at
    the row count n, since no n-row matrix can exceed rank n.
    """
    if n < 1 or m < 1 or d < 1:
        raise InvalidParameterError(f"need n, m, d >= 1, got {(n, m, d)}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((m, n))
    A = G.T @ G / m
    A = 0.5 * (A + A.T)
    if B is None:
        B = rng.standard_normal((n, d))
    else:
        B = as_matrix(B, "B")
        if B.shape != (n, d):
            raise DimensionError(f"B has shape {B.shape}, expected {(n, d)}")
    sys = ControlSystem(QuadraticProblem(A=A, b=np.zeros(n), c=0.0), B)
    report = is_controllable(sys)
    return {
        "n": n,
        "m": m,
        "d": d,
        "rank": report.rank,
        "controllable": report.controllable,
        "lower_ok": report.rank >= d,
        "upper_ok": report.rank <= min(n, n * d),
    }
