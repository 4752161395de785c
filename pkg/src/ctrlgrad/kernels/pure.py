"""Pure NumPy reference implementations of the hot loops.

These are the fallback when the compiled extension is unavailable and the
ground truth the compiled kernels are tested against. The arithmetic here
is deliberately written step by step (one rounding per line) so the
compiled versions can reproduce it operation for operation.
"""

import numpy as np

POLICY_ZERO = 0
POLICY_CONSTANT = 1
POLICY_STATE_FB = 2
POLICY_GRAD_FB = 3
POLICY_SCHEDULE = 4


def rk4_lti(M, W, x0, h, steps):
    """Classical fourth-order Runge-Kutta for x' = M x + w(t).

    W holds the forcing at the stage times, three rows per step: rows
    (3i, 3i+1, 3i+2) are w at (t_i, t_i + h/2, t_{i+1}) for step i, so W
    has shape (3*steps, n). Keeping the endpoint row per step (instead of
    sharing it with the next step's first stage) lets discontinuous
    forcing present one-sided values on each side of a grid point.
    Returns the states at the full grid nodes, shape (steps + 1, n),
    first row equal to x0.
    """
    n = x0.shape[0]
    out = np.empty((steps + 1, n))
    x = x0.copy()
    out[0] = x
    for i in range(steps):
        w0 = W[3 * i]
        wh = W[3 * i + 1]
        w1 = W[3 * i + 2]
        k1 = M @ x + w0
        k2 = M @ (x + 0.5 * h * k1) + wh
        k3 = M @ (x + 0.5 * h * k2) + wh
        k4 = M @ (x + h * k3) + w1
        x = x + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        out[i + 1] = x
    return out


def descent_loop(A, b, c, Bmat, x0, gamma, scale, policy, u_const, gain, schedule,
                 max_iters, stop_tol, ref):
    """Controlled gradient descent x_{k+1} = x_k - gamma*(A x_k + b) + scale*(B u_k).

    Per-iterate records are taken *before* stepping, so row k describes
    iterate x_k and the control used to leave it. The loop stops when the
    gradient norm drops to stop_tol or after max_iters steps, whichever
    comes first. The control add is skipped whenever u_k is exactly zero,
    which makes a zero gain bitwise identical to the zero policy.

    Returns (f, grad_norm, control_norm, dist, x, iters_used, converged,
    exhausted): arrays of length iters_used + 1; dist is None when ref is
    None; exhausted >= 0 flags the step index at which a schedule ran out
    of rows (the caller turns that into an error).
    """
    rows = max_iters + 1
    f = np.empty(rows)
    gn = np.empty(rows)
    un = np.empty(rows)
    dist = np.empty(rows) if ref is not None else None
    x = x0.copy()
    converged = False
    exhausted = -1
    k = 0
    while True:
        g = A @ x + b
        if policy == POLICY_ZERO:
            u = None
        elif policy == POLICY_CONSTANT:
            u = u_const
        elif policy == POLICY_STATE_FB:
            u = gain @ x
        elif policy == POLICY_GRAD_FB:
            u = gain @ g
        else:
            u = schedule[k] if k < schedule.shape[0] else None
        f[k] = 0.5 * (x @ g) + 0.5 * (x @ b) + c
        gn[k] = np.sqrt(g @ g)
        un[k] = np.sqrt(u @ u) if u is not None else 0.0
        if dist is not None:
            e = x - ref
            dist[k] = np.sqrt(e @ e)
        if gn[k] <= stop_tol:
            converged = True
            break
        if k == max_iters:
            break
        if policy == POLICY_SCHEDULE and u is None:
            exhausted = k
            break
        x = x - gamma * g
        if u is not None and u.any():
            x = x + scale * (Bmat @ u)
        k += 1
    used = k + 1
    d_out = dist[:used].copy() if dist is not None else None
    return (f[:used].copy(), gn[:used].copy(), un[:used].copy(), d_out,
            x, k, converged, exhausted)
