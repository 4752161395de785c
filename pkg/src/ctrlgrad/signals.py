"""Control signals u(t) fed into the flow integrator.

Every signal knows its control dimension ``m`` and can be evaluated at a
single time. Signals also provide ``sample_half_grid``, a vectorized hook
used by the integrator to pull all stage-time samples at once; the
steering signal overrides it with an incremental matrix-exponential
propagation so that a 4000-step integration does not cost 8000 full
matrix exponentials.
"""

import numpy as np

from .errors import DimensionError, InvalidParameterError
from .linalg import as_matrix, as_vector, mat_exp

__all__ = [
    "ControlSignal",
    "ZeroControl",
    "ConstantControl",
    "StateFeedback",
    "PiecewiseConstant",
    "SteeringControl",
]


class ControlSignal:
    """Base class; subclasses set ``m`` and implement ``eval``."""

    m = 0
    needs_state = False

    def eval(self, t, x=None):
        raise NotImplementedError

    def sample_half_grid(self, t0, h2, count):
        """u at the stage times t0 + j*h2, j = 0..count-1; shape (count, m)."""
        out = np.empty((count, self.m))
        for j in range(count):
            out[j] = self.eval(t0 + j * h2)
        return out

    def stage_samples(self, t0, h, steps):
        """RK4 stage forcing, three rows per step: u at (t_i, t_i+h/2, t_{i+1}).

        The endpoint row belongs to its own step, so a signal with a jump
        on the grid can present the left limit there while the next step's
        first row carries the new value. For continuous signals this is
        just the half-grid resampled, which is what this default does;
        PiecewiseConstant overrides it.
        """
        U = self.sample_half_grid(t0, 0.5 * h, 2 * steps + 1)
        out = np.empty((3 * steps, self.m))
        out[0::3] = U[0:-1:2]
        out[1::3] = U[1::2]
        out[2::3] = U[2::2]
        return out


class ZeroControl(ControlSignal):
    def __init__(self, m):
        if m < 0:
            raise InvalidParameterError(f"m must be >= 0, got {m}")
        self.m = int(m)

    def eval(self, t, x=None):
        return np.zeros(self.m)

    def sample_half_grid(self, t0, h2, count):
        return np.zeros((count, self.m))


class ConstantControl(ControlSignal):
    def __init__(self, u):
        self.u = as_vector(u, "u")
        self.m = self.u.shape[0]

    def eval(self, t, x=None):
        return self.u

    def sample_half_grid(self, t0, h2, count):
        return np.broadcast_to(self.u, (count, self.m)).copy()


class StateFeedback(ControlSignal):
    """u(t) = K x(t); the integrator absorbs this into the drift matrix."""

    needs_state = True

    def __init__(self, K):
        self.K = as_matrix(K, "K")
        self.m = self.K.shape[0]

    def eval(self, t, x=None):
        if x is None:
            raise InvalidParameterError("state feedback needs the state to evaluate")
        return self.K @ np.asarray(x, dtype=float)

    def sample_half_grid(self, t0, h2, count):
        raise InvalidParameterError(
            "state feedback has no open-loop samples; it is folded into the drift"
        )


class PiecewiseConstant(ControlSignal):
    """Right-continuous step function: u(t) = values[i] on [times[i], times[i+1]).

    ``times`` and ``values`` have equal length; the last value extends to
    +infinity and times before times[0] clamp to the first value.
    """

    def __init__(self, times, values):
        self.times = as_vector(times, "times")
        values = np.asarray(values, dtype=float)
        if values.ndim != 2:
            raise DimensionError(f"values must be 2-d (k, m), got shape {values.shape}")
        if self.times.shape[0] != values.shape[0]:
            raise DimensionError(
                f"{self.times.shape[0]} knots but {values.shape[0]} values"
            )
        if self.times.shape[0] == 0:
            raise InvalidParameterError("need at least one piece")
        if np.any(np.diff(self.times) <= 0):
            raise InvalidParameterError("times must be strictly increasing")
        self.values = np.ascontiguousarray(values)
        self.m = values.shape[1]

    def _index(self, t):
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return min(max(i, 0), self.times.shape[0] - 1)

    def _indices(self, ts):
        return np.clip(np.searchsorted(self.times, ts, side="right") - 1, 0,
                       self.times.shape[0] - 1)

    def eval(self, t, x=None):
        return self.values[self._index(t)]

    def sample_half_grid(self, t0, h2, count):
        return self.values[self._indices(t0 + h2 * np.arange(count))]

    def stage_samples(self, t0, h, steps):
        # The endpoint row of each step takes the piece active on the open
        # interval (sampled at the midpoint), i.e. the left limit at the
        # step's right edge. A switch sitting exactly on the grid then
        # leaves the preceding step entirely inside the old piece, which
        # keeps RK4 at full order across the switch.
        starts = t0 + h * np.arange(steps)
        i_mid = self._indices(starts + 0.5 * h)
        out = np.empty((3 * steps, self.m))
        out[0::3] = self.values[self._indices(starts)]
        out[1::3] = self.values[i_mid]
        out[2::3] = self.values[i_mid]
        return out


class SteeringControl(ControlSignal):
    """Minimum-energy open-loop control u(t) = B^T e^{-A^T (t1 - t)} p.

    Built by flow.steering_control; p = W(T)^{-1} (target - free response).
    Defined on the window [t0, t1] it was designed for (evaluation outside
    extrapolates smoothly but has no steering meaning).
    """

    def __init__(self, A, B, t0, t1, p):
        self.A = as_matrix(A, "A")
        self.B = as_matrix(B, "B")
        self.t0 = float(t0)
        self.t1 = float(t1)
        self.p = as_vector(p, "p")
        self.m = self.B.shape[1]

    def eval(self, t, x=None):
        q = mat_exp(self.A.T, -(self.t1 - float(t))) @ self.p
        return self.B.T @ q

    def sample_half_grid(self, t0, h2, count):
        # q_{j+1} = e^{A^T h2} q_j walks e^{-A^T (t1 - t)} p along the grid
        # with two matrix exponentials total instead of one per node.
        out = np.empty((count, self.m))
        q = mat_exp(self.A.T, -(self.t1 - t0)) @ self.p
        E = mat_exp(self.A.T, h2)
        for j in range(count):
            out[j] = self.B.T @ q
            if j + 1 < count:
                q = E @ q
        return out
