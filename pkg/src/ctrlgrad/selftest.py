"""Embedded invariant suite behind the `selftest` CLI subcommand.

Every check is seeded and free of timing or environment queries, so the
emitted report is byte-identical across runs on the same platform --
which is itself one of the things the acceptance suite verifies.
"""

import numpy as np

from . import kernels
from .controllability import ControlSystem, is_controllable, kalman_matrix
from .descent import DescentConfig, ZeroPolicy, run_descent
from .flow import integrate, steering_control
from .linalg import char_poly, mat_exp, matrix_poly, solve_shifted_spd
from .prox import ProxQuery, prox_resolvent_equivalence
from .quadratic import QuadraticProblem
from .sensing import generate_sensing, to_quadratic
from .signals import ZeroControl

__all__ = ["run_selftest"]


def _random_psd(rng, n, scale=1.0):
    G = rng.standard_normal((n, n))
    A = G @ G.T / n
    return scale * 0.5 * (A + A.T)


def _check_mat_exp(rng):
    E = mat_exp(np.diag([1.0, 2.0]))
    if abs(E[0, 0] - np.e) > 1e-13 or abs(E[1, 1] - np.e ** 2) > 1e-12:
        return False
    A = _random_psd(rng, 5)
    lhs = mat_exp(A, 0.7) @ mat_exp(A, 0.3)
    return bool(np.max(np.abs(lhs - mat_exp(A, 1.0))) <= 1e-12)


def _check_char_poly(rng):
    if not np.allclose(char_poly(np.diag([1.0, 2.0])), [2.0, -3.0, 1.0], atol=1e-13):
        return False
    for _ in range(5):
        A = rng.standard_normal((4, 4))
        residual = np.max(np.abs(matrix_poly(char_poly(A), A)))
        if residual > 1e-6 * np.linalg.norm(A) ** 4:
            return False
    return True


def _check_shifted_solve(rng):
    x = solve_shifted_spd(np.diag([1.0, 3.0]), 2.0, np.array([3.0, 7.0]))
    return bool(np.max(np.abs(x - 1.0)) <= 1e-12)


def _check_controllability(rng):
    p = QuadraticProblem(np.diag([1.0, 2.0]), np.zeros(2))
    good = is_controllable(ControlSystem(p, np.array([[1.0], [1.0]])))
    p2 = QuadraticProblem(np.eye(2), np.zeros(2))
    bad = is_controllable(ControlSystem(p2, np.array([[1.0], [0.0]])))
    K = kalman_matrix(ControlSystem(p, np.array([[1.0], [1.0]])))
    return (good.controllable and not bad.controllable
            and np.array_equal(K, np.array([[1.0, -1.0], [1.0, -2.0]])))


def _check_steering(rng):
    p = QuadraticProblem(np.zeros((2, 2)), np.zeros(2))
    sys = ControlSystem(p, np.eye(2))
    x0 = np.array([1.0, -1.0])
    xd = np.array([0.5, 2.0])
    sig = steering_control(sys, x0, xd, 1.0, quad_nodes=64)
    traj = integrate(sys, sig, x0, 0.0, 1.0, 200)
    return bool(np.linalg.norm(traj.states[-1] - xd) <= 1e-9)


def _check_descent_matches_plain_gd(rng):
    A = _random_psd(rng, 4)
    b = rng.standard_normal(4)
    sys = ControlSystem(QuadraticProblem(A, b), np.zeros((4, 0)))
    x0 = rng.standard_normal(4)
    cfg = DescentConfig(gamma=0.1, max_iters=50)
    rec = run_descent(sys, ZeroPolicy(), x0, cfg)
    x = x0.copy()
    for _ in range(50):
        x = x - 0.1 * (A @ x + b)
    return bool(np.array_equal(rec.final_x, x))


def _check_prox(rng):
    A = _random_psd(rng, 5)
    p = QuadraticProblem(A, rng.standard_normal(5))
    q = ProxQuery(problem=p, B=rng.standard_normal((5, 2)),
                  u=rng.standard_normal(2), gamma=0.7, z=rng.standard_normal(5))
    res = prox_resolvent_equivalence(q)
    if res["max_abs_diff"] > 1e-10 * (1.0 + np.linalg.norm(q.z)):
        return False
    foc = p.gradient(res["prox"]) + (res["prox"] - q.z) / q.gamma - q.B @ q.u
    return bool(np.linalg.norm(foc) <= 1e-9 * (1.0 + np.linalg.norm(q.z)))


def _check_sensing(rng):
    sp1 = generate_sensing(16, 32, 7)
    sp2 = generate_sensing(16, 32, 7)
    if not (sp1.Asense.tobytes() == sp2.Asense.tobytes()
            and sp1.xbar.tobytes() == sp2.xbar.tobytes()):
        return False
    grad = to_quadratic(sp1).gradient(sp1.xbar)
    return bool(np.linalg.norm(grad) <= 1e-10)


def _check_kernel_backends(rng):
    if kernels.BACKEND != "compiled":
        return True  # nothing to cross-check in a pure-only install
    pure = kernels.get_backend("pure")
    fast = kernels.get_backend("compiled")
    n = 6
    M = -_random_psd(rng, n)
    W = rng.standard_normal((3 * 40, n))
    x0 = rng.standard_normal(n)
    sp = pure.rk4_lti(M, W, x0, 0.01, 40)
    sf = fast.rk4_lti(np.ascontiguousarray(M), np.ascontiguousarray(W), x0, 0.01, 40)
    return bool(np.max(np.abs(sp - sf)) <= 1e-12)


_CHECKS = (
    ("matrix-exponential", _check_mat_exp),
    ("characteristic-polynomial", _check_char_poly),
    ("shifted-spd-solve", _check_shifted_solve),
    ("kalman-rank", _check_controllability),
    ("gramian-steering", _check_steering),
    ("descent-equals-plain-gd", _check_descent_matches_plain_gd),
    ("prox-resolvent", _check_prox),
    ("sensing-determinism", _check_sensing),
    ("kernel-backends", _check_kernel_backends),
)


def run_selftest(out=None):
    """Run all embedded checks; prints one line per check plus a summary.

    Returns True iff everything passed. Output is deterministic (no
    timings, no paths, no environment details).
    """
    emit = out if out is not None else print
    ok = True
    for name, fn in _CHECKS:
        rng = np.random.default_rng(20240817)
        passed = bool(fn(rng))
        ok = ok and passed
        emit(f"{'ok  ' if passed else 'FAIL'} {name}")
    emit(f"selftest: {len(_CHECKS)} checks, {'all passed' if ok else 'FAILURES'}")
    return ok
