"""Controlled gradient descent x_{k+1} = x_k - gamma*(A x_k + b) + scale*(B u_k).

Two couplings are supported for the control term: "euler" applies
gamma*B*u_k (the consistent explicit-Euler discretization of the flow,
the default) and "paper" applies B*u_k at unit scale regardless of the
step size (the control acts as a per-step impulse). Both reduce to
classical gradient descent for u = 0.

Feedback design: K = B^+ A minimizes ||A - BK|| over all gains, leaving
the closed-loop drift (I - BB^+)A, i.e. A projected off range(B). Two
realizations of that design are provided as policies:

- state feedback u = Kx: fastest contraction, but its fixed point solves
  (A - BK)x = -b and is generally *not* a minimizer of f;
- gradient feedback u = G*grad f(x): any critical point of f stays fixed
  for every gain G. With G = B^+ the error recursion is exactly
  (I - gamma*(A - BK)) applied to x - x*, so the certificate below is a
  true bound while the minimizer is preserved.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import (
    DimensionError,
    InvalidParameterError,
    NoCriticalPointError,
    ScheduleExhaustedError,
)
from .linalg import as_matrix, as_vector, min_norm_least_squares, spectral_norm

__all__ = [
    "DescentConfig",
    "RunRecord",
    "ControlPolicy",
    "ZeroPolicy",
    "ConstantPolicy",
    "StateFeedbackPolicy",
    "GradientFeedbackPolicy",
    "SchedulePolicy",
    "descent_step",
    "run_descent",
    "design_feedback",
    "feedback_gradient_gain",
    "greedy_gain",
    "RateCertificate",
    "rate_certificate",
    "RateBound",
    "rate_bound_curve",
]

_COUPLINGS = ("euler", "paper")


@dataclass(eq=False)
class DescentConfig:
    gamma: float
    max_iters: int = 1000
    stop_tol: float = 0.0
    coupling: str = "euler"

    def __post_init__(self):
        self.gamma = float(self.gamma)
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise InvalidParameterError(f"gamma must be positive and finite, got {self.gamma}")
        self.max_iters = int(self.max_iters)
        if self.max_iters < 1:
            raise InvalidParameterError(f"max_iters must be >= 1, got {self.max_iters}")
        self.stop_tol = float(self.stop_tol)
        if not (np.isfinite(self.stop_tol) and self.stop_tol >= 0):
            raise InvalidParameterError(f"stop_tol must be >= 0, got {self.stop_tol}")
        if self.coupling not in _COUPLINGS:
            raise InvalidParameterError(
                f"coupling must be one of {_COUPLINGS}, got {self.coupling!r}"
            )

    @property
    def control_scale(self):
        return self.gamma if self.coupling == "euler" else 1.0


@dataclass(eq=False)
class RunRecord:
    """Per-iterate summaries; row k describes iterate x_k before stepping.

    control_norm[k] is the norm of the control applied when leaving x_k;
    at the final row it is the control the policy evaluates there (zero
    for an exhausted schedule -- no step is taken from the last iterate).
    """

    f_value: np.ndarray
    grad_norm: np.ndarray
    control_norm: np.ndarray
    dist_to_ref: Optional[np.ndarray]
    final_x: np.ndarray
    iters_used: int
    converged: bool


class ControlPolicy:
    """Maps the current iterate to a control; see concrete subclasses."""

    def kernel_args(self, sys):
        """(policy_code, u_const, gain, schedule) arrays for the kernels."""
        raise NotImplementedError


class ZeroPolicy(ControlPolicy):
    def kernel_args(self, sys):
        m = sys.m
        return (kernels.POLICY_ZERO, np.zeros(m), np.zeros((m, sys.n)),
                np.zeros((0, m)))


class ConstantPolicy(ControlPolicy):
    def __init__(self, u):
        self.u = as_vector(u, "u")

    def kernel_args(self, sys):
        if self.u.shape[0] != sys.m:
            raise DimensionError(f"u has dim {self.u.shape[0]}, expected {sys.m}")
        return (kernels.POLICY_CONSTANT, self.u, np.zeros((sys.m, sys.n)),
                np.zeros((0, sys.m)))


class StateFeedbackPolicy(ControlPolicy):
    """u_k = K x_k."""

    def __init__(self, K):
        self.K = as_matrix(K, "K")

    def kernel_args(self, sys):
        if self.K.shape != (sys.m, sys.n):
            raise DimensionError(f"K has shape {self.K.shape}, expected {(sys.m, sys.n)}")
        return (kernels.POLICY_STATE_FB, np.zeros(sys.m), self.K, np.zeros((0, sys.m)))


class GradientFeedbackPolicy(ControlPolicy):
    """u_k = K (A x_k + b); every critical point of f is a fixed point."""

    def __init__(self, K):
        self.K = as_matrix(K, "K")

    def kernel_args(self, sys):
        if self.K.shape != (sys.m, sys.n):
            raise DimensionError(f"K has shape {self.K.shape}, expected {(sys.m, sys.n)}")
        return (kernels.POLICY_GRAD_FB, np.zeros(sys.m), self.K, np.zeros((0, sys.m)))


class SchedulePolicy(ControlPolicy):
    """u_k = U[k]; raises schedule-exhausted if the run outlives the rows."""

    def __init__(self, U):
        U = np.ascontiguousarray(np.asarray(U, dtype=float))
        if U.ndim != 2:
            raise DimensionError(f"schedule must be 2-d (iters, m), got shape {U.shape}")
        if not np.all(np.isfinite(U)):
            raise InvalidParameterError("schedule contains non-finite entries")
        self.U = U

    def kernel_args(self, sys):
        if self.U.shape[1] != sys.m:
            raise DimensionError(
                f"schedule rows have dim {self.U.shape[1]}, expected {sys.m}"
            )
        return (kernels.POLICY_SCHEDULE, np.zeros(sys.m), np.zeros((sys.m, sys.n)),
                self.U)


def descent_step(sys, x, u, cfg):
    """One controlled step x - gamma*(Ax + b) + scale*(Bu)."""
    x = as_vector(x, "x")
    u = as_vector(u, "u")
    if x.shape[0] != sys.n:
        raise DimensionError(f"x has dim {x.shape[0]}, expected {sys.n}")
    if u.shape[0] != sys.m:
        raise DimensionError(f"u has dim {u.shape[0]}, expected {sys.m}")
    g = sys.problem.A @ x + sys.problem.b
    y = x - cfg.gamma * g
    if u.any():
        y = y + cfg.control_scale * (sys.B @ u)
    return y


def run_descent(sys, policy, x0, cfg, ref=None):
    """Iterate descent_step under the policy; see RunRecord for semantics.

    Stops when the gradient norm drops to cfg.stop_tol or after
    cfg.max_iters steps. ``ref`` (e.g. a known minimizer or ground-truth
    signal) enables the dist_to_ref column. The zero policy reproduces
    classical gradient descent bitwise.
    """
    x0 = as_vector(x0, "x0")
    if x0.shape[0] != sys.n:
        raise DimensionError(f"x0 has dim {x0.shape[0]}, expected {sys.n}")
    if ref is not None:
        ref = as_vector(ref, "ref")
        if ref.shape[0] != sys.n:
            raise DimensionError(f"ref has dim {ref.shape[0]}, expected {sys.n}")
    code, u_const, gain, schedule = policy.kernel_args(sys)
    f, gn, un, dist, x, used, converged, exhausted = kernels.descent_loop(
        sys.problem.A, sys.problem.b, sys.problem.c, sys.B, x0,
        cfg.gamma, cfg.control_scale, code, u_const, gain, schedule,
        cfg.max_iters, cfg.stop_tol, ref,
    )
    if exhausted >= 0:
        raise ScheduleExhaustedError(
            f"schedule provides {schedule.shape[0]} controls but step {exhausted} "
            "was reached"
        )
    return RunRecord(f_value=f, grad_norm=gn, control_norm=un, dist_to_ref=dist,
                     final_x=x, iters_used=used, converged=converged)


def design_feedback(sys):
    """Gain K = B^+ A: the Frobenius-optimal minimizer of ||A - BK||.

    A - BK becomes (I - BB^+)A, the component of the drift that no
    feedback through B can cancel; its norm is the certificate's tau.
    """
    return np.linalg.lstsq(sys.B, sys.problem.A, rcond=None)[0]


def feedback_gradient_gain(sys):
    """Pseudo-inverse gain B^+ for gradient feedback.

    With u = B^+ grad f(x) the update error follows I - gamma*(A - BK)
    for K = design_feedback(sys) exactly (B B^+ A = B K), so this is the
    gradient-feedback realization of the designed state feedback: same
    contraction factor, but minimizers of f stay fixed.
    """
    return np.linalg.lstsq(sys.B, np.eye(sys.n), rcond=None)[0]


def greedy_gain(sys, gamma):
    """Gain of the one-step-optimal gradient feedback (euler coupling).

    u_k = G (A x_k + b) with G = -(gamma B^T A B)^+ B^T (I - gamma A)
    minimizes f(x_{k+1}) over all controls in the reachable slice
    x_k - gamma g + gamma B u; descent is therefore at least as fast as
    plain gradient descent at every step, per step. Flat directions of
    the subproblem (kernel of B^T A B) are projected out by the
    pseudo-inverse.
    """
    gamma = float(gamma)
    if not gamma > 0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    if sys.m == 0:
        return np.zeros((0, sys.n))
    A = sys.problem.A
    B = sys.B
    S = gamma * (B.T @ A @ B)
    R = B.T @ (np.eye(sys.n) - gamma * A)
    return -np.linalg.lstsq(S, R, rcond=None)[0]


@dataclass(eq=False)
class RateCertificate:
    tau: float
    contraction: float
    fixed_point: np.ndarray
    preserves_argmin: bool


def rate_certificate(sys, K, gamma):
    """Contraction data for state feedback u = Kx under euler coupling.

    tau = ||A - BK|| and contraction = ||I - gamma*(A - BK)||; the
    closed-loop error recursion is e_{k+1} = (I - gamma*(A - BK)) e_k, so
    contraction < 1 certifies linear convergence to the fixed point.
    preserves_argmin reports whether that fixed point is still a critical
    point of f (the feedback vanishes there), i.e. whether the scheme
    still minimizes f rather than some shifted surrogate.

    Raises NoCriticalPointError when (A - BK)x = -b has no solution (the
    closed loop has no fixed point; e.g. full cancellation BK = A with
    b != 0 leaves the constant drift -gamma*b).
    """
    gamma = float(gamma)
    if not gamma > 0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    K = as_matrix(K, "K")
    if K.shape != (sys.m, sys.n):
        raise DimensionError(f"K has shape {K.shape}, expected {(sys.m, sys.n)}")
    A = sys.problem.A
    b = sys.problem.b
    Acl = A - sys.B @ K
    tau = spectral_norm(Acl)
    contraction = spectral_norm(np.eye(sys.n) - gamma * Acl)
    fp = min_norm_least_squares(Acl, -b)
    residual = np.linalg.norm(Acl @ fp + b)
    if residual > 1e-8 * (1.0 + np.linalg.norm(b)):
        raise NoCriticalPointError(
            f"(A - BK)x = -b is inconsistent (residual {residual:.3e}); "
            "the closed loop has no fixed point"
        )
    preserves = np.linalg.norm(sys.B @ (K @ fp)) <= 1e-8 * (1.0 + np.linalg.norm(b))
    return RateCertificate(tau=float(tau), contraction=float(contraction),
                           fixed_point=fp, preserves_argmin=bool(preserves))


@dataclass(eq=False)
class RateBound:
    """values[k] = (1 - gamma*tau)^k * dist0; degenerate flags base <= 0,
    where the bound stops being meaningful (reported as-is, not clamped)."""

    values: np.ndarray
    base: float
    degenerate: bool


def rate_bound_curve(tau, gamma, dist0, k_max):
    tau = float(tau)
    gamma = float(gamma)
    dist0 = float(dist0)
    k_max = int(k_max)
    if tau < 0:
        raise InvalidParameterError(f"tau must be >= 0, got {tau}")
    if not gamma > 0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    if dist0 < 0:
        raise InvalidParameterError(f"dist0 must be >= 0, got {dist0}")
    if k_max < 0:
        raise InvalidParameterError(f"k_max must be >= 0, got {k_max}")
    base = 1.0 - gamma * tau
    values = dist0 * (base ** np.arange(k_max + 1, dtype=float))
    return RateBound(values=values, base=base, degenerate=(base <= 0.0))
