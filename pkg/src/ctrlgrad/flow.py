"""Controlled gradient flow x' = -Ax + Bu - b.

Integration (fixed-step RK4), the exact variation-of-constants solution
for piecewise-constant controls, the controllability Gramian, and
minimum-energy steering between arbitrary states. Steering is the
constructive side of the Kalman rank test: whenever the pair (-A, B) is
controllable the Gramian is invertible and the control

    u(t) = B^T e^{-A^T (T - t)} W(T)^{-1} (x_d - free response at T)

drives x0 to x_d in time T.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import kernels
from .errors import (
    DimensionError,
    IllConditionedGramianError,
    InvalidParameterError,
    SteeringInfeasibleError,
)
from .controllability import is_controllable
from .linalg import _power_largest, as_vector, mat_exp
from .signals import ConstantControl, PiecewiseConstant, StateFeedback, SteeringControl, ZeroControl

__all__ = [
    "Trajectory",
    "integrate",
    "closed_form_state",
    "gramian",
    "steering_control",
    "value_derivative",
]

_GRAMIAN_COND_LIMIT = 1e12


@dataclass(eq=False)
class Trajectory:
    """times (N+1,), states (N+1, n), controls (N+1, m); row j at times[j]."""

    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray


def _check_signal_dim(sys, sig):
    if sig.m != sys.m:
        raise DimensionError(f"signal has m={sig.m}, system has m={sys.m}")


def integrate(sys, sig, x0, t0, t1, steps):
    """Fixed-step RK4 on x' = -Ax + B u(t, x) - b over [t0, t1].

    The control is sampled at the RK4 stage times, three samples per step
    (see ControlSignal.stage_samples); state feedback is folded into the
    drift matrix so the closed loop is integrated as the LTI system
    x' = (-A + BK)x - b. Deterministic: identical inputs give
    bitwise-identical trajectories.
    """
    x0 = as_vector(x0, "x0")
    if x0.shape[0] != sys.n:
        raise DimensionError(f"x0 has dim {x0.shape[0]}, expected {sys.n}")
    _check_signal_dim(sys, sig)
    t0 = float(t0)
    t1 = float(t1)
    if not t1 > t0:
        raise InvalidParameterError(f"need t1 > t0, got [{t0}, {t1}]")
    steps = int(steps)
    if steps < 1:
        raise InvalidParameterError(f"steps must be >= 1, got {steps}")
    A = sys.problem.A
    b = sys.problem.b
    B = sys.B
    n = sys.n
    h = (t1 - t0) / steps
    if isinstance(sig, StateFeedback):
        M = -A + B @ sig.K
        W = np.broadcast_to(-b, (3 * steps, n)).copy()
        U = None
    else:
        M = -A
        U = sig.stage_samples(t0, h, steps)
        W = U @ B.T - b
    states = kernels.rk4_lti(np.ascontiguousarray(M), np.ascontiguousarray(W), x0, h, steps)
    times = np.linspace(t0, t1, steps + 1)
    if U is None:
        controls = states @ sig.K.T
    else:
        controls = np.empty((steps + 1, sys.m))
        controls[:steps] = U[0::3]
        controls[steps] = sig.eval(t1)
    return Trajectory(times=times, states=states, controls=controls)


def _constant_pieces(sig, t0, t):
    """(t_start, t_end, u) intervals covering [t0, t] for step-function signals."""
    if isinstance(sig, (ZeroControl, ConstantControl)):
        return [(t0, t, sig.eval(t0))]
    if isinstance(sig, PiecewiseConstant):
        cuts = [t0]
        for tk in sig.times:
            if t0 < tk < t:
                cuts.append(float(tk))
        cuts.append(t)
        return [(ta, tb, sig.eval(0.5 * (ta + tb))) for ta, tb in zip(cuts[:-1], cuts[1:])]
    raise InvalidParameterError(
        "closed-form solution requires a piecewise-constant signal "
        f"(got {type(sig).__name__})"
    )


def closed_form_state(sys, sig, x0, t0, t):
    """Exact state at time t under a piecewise-constant control.

    Variation of constants: x(t) = e^{-A(t-t0)} x0 + int_{t0}^t e^{-A(t-s)}
    (B u(s) - b) ds. Over each piece with constant forcing v the update is

        x <- e^{-A h} x + (int_0^h e^{-A s} ds) v,

    and both factors come from one exponential of the augmented matrix
    [[-A, v], [0, 0]] * h, so no quadrature is involved.
    """
    x0 = as_vector(x0, "x0")
    if x0.shape[0] != sys.n:
        raise DimensionError(f"x0 has dim {x0.shape[0]}, expected {sys.n}")
    _check_signal_dim(sys, sig)
    t0 = float(t0)
    t = float(t)
    if t < t0:
        raise InvalidParameterError(f"t={t} precedes t0={t0}")
    n = sys.n
    x = x0.copy()
    if t == t0:
        return x
    A = sys.problem.A
    b = sys.problem.b
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = -A
    for ta, tb, u in _constant_pieces(sig, t0, t):
        v = sys.B @ u - b
        aug[:n, n] = v
        E = mat_exp(aug, tb - ta)
        x = E[:n, :n] @ x + E[:n, n]
    return x


def gramian(sys, T, quad_nodes=200):
    """W(T) = int_0^T e^{-As} B B^T e^{-A^T s} ds by composite Simpson.

    The integrand columns e^{-As}B are propagated incrementally with the
    half-step exponential (two multiplications per subinterval). The
    result is symmetrized, so it is symmetric PSD by construction.
    """
    T = float(T)
    if not T > 0:
        raise InvalidParameterError(f"T must be positive, got {T}")
    quad_nodes = int(quad_nodes)
    if quad_nodes < 1:
        raise InvalidParameterError(f"quad_nodes must be >= 1, got {quad_nodes}")
    A = sys.problem.A
    B = sys.B
    n = sys.n
    h = T / quad_nodes
    E2 = mat_exp(A, -0.5 * h)
    C = B.copy()
    W = np.zeros((n, n))
    G_left = C @ C.T
    for _ in range(quad_nodes):
        C = E2 @ C
        G_mid = C @ C.T
        C = E2 @ C
        G_right = C @ C.T
        W += G_left + 4.0 * G_mid + G_right
        G_left = G_right
    W *= h / 6.0
    return 0.5 * (W + W.T)


def steering_control(sys, x0, xd, T, quad_nodes=2000, t0=0.0):
    """Minimum-energy control steering x0 to xd in time T.

    Raises SteeringInfeasibleError when the Kalman test fails and
    IllConditionedGramianError when the Gramian's condition estimate
    (power iteration on W and on its inverse action) exceeds 1e12 --
    steering would then demand unreliably large control energy.

    The returned signal is anchored on the window [t0, t0 + T]; integrate
    it over exactly that window. Accuracy contract: with steps >= 4000
    and quad_nodes >= 2000 the terminal error is <= 1e-5 * (1 + ||xd||).
    """
    x0 = as_vector(x0, "x0")
    xd = as_vector(xd, "xd")
    n = sys.n
    if x0.shape[0] != n or xd.shape[0] != n:
        raise DimensionError("x0/xd dimension mismatch with system")
    T = float(T)
    if not T > 0:
        raise InvalidParameterError(f"T must be positive, got {T}")
    report = is_controllable(sys)
    if not report.controllable:
        raise SteeringInfeasibleError(
            f"system is not controllable (Kalman rank {report.rank} < {n}); "
            "cannot steer between arbitrary states"
        )
    W = gramian(sys, T, quad_nodes)
    try:
        cw = cho_factor(W, lower=True)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedGramianError(
            f"Gramian factorization failed ({exc}); effectively singular"
        ) from None
    lam_max = _power_largest(lambda v: W @ v, n)
    lam_inv_max = _power_largest(lambda v: cho_solve(cw, v), n)
    cond = lam_max * lam_inv_max
    if cond > _GRAMIAN_COND_LIMIT:
        raise IllConditionedGramianError(
            f"Gramian condition estimate {cond:.3e} exceeds {_GRAMIAN_COND_LIMIT:.0e}"
        )
    free = closed_form_state(sys, ZeroControl(sys.m), x0, 0.0, T)
    p = cho_solve(cw, xd - free)
    return SteeringControl(sys.problem.A, sys.B, t0, t0 + T, p)


def value_derivative(p, sys, x, u):
    """d/dt f(x(t)) along the controlled flow: -||Ax+b||^2 + <Ax+b, Bu>.

    Strictly negative away from critical points whenever the control term
    does not overpower the gradient; zero at critical points regardless
    of u.
    """
    x = as_vector(x, "x")
    u = as_vector(u, "u")
    if x.shape[0] != p.n:
        raise DimensionError(f"x has dim {x.shape[0]}, expected {p.n}")
    if u.shape[0] != sys.m:
        raise DimensionError(f"u has dim {u.shape[0]}, expected {sys.m}")
    g = p.gradient(x)
    return float(-(g @ g) + g @ (sys.B @ u))
