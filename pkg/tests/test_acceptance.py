"""Acceptance suite: ten system-level checks, one test per criterion.

Each test is a self-contained experiment with frozen seeds and an
explicit tolerance; tests/conftest.py prints a one-line verdict per
criterion at the end of the run. Where a check has a stated runtime
budget, the test asserts it too.
"""

import time

import numpy as np

from ctrlgrad.cli import main
from ctrlgrad.controllability import ControlSystem, is_controllable
from ctrlgrad.descent import (
    DescentConfig,
    GradientFeedbackPolicy,
    design_feedback,
    feedback_gradient_gain,
    rate_certificate,
    run_descent,
)
from ctrlgrad.flow import gramian, integrate, steering_control, value_derivative
from ctrlgrad.linalg import char_poly, matrix_poly, spectral_norm
from ctrlgrad.prox import ProxQuery, controlled_prox, prox_resolvent_equivalence
from ctrlgrad.quadratic import QuadraticProblem, solve_critical
from ctrlgrad.sensing import (
    RegimeSpec,
    gaussian_controllability_sweep,
    generate_sensing,
    run_regime_experiment,
)
from ctrlgrad.signals import ConstantControl, PiecewiseConstant


def _random_psd(rng, n):
    G = rng.standard_normal((n, n))
    return G @ G.T / n


def _span_dim(vectors, tol=1e-9):
    """Dimension of span(vectors) by modified Gram-Schmidt."""
    basis = []
    for v in vectors:
        w = np.array(v, dtype=float)
        scale = np.linalg.norm(w)
        for q in basis:
            w = w - (q @ w) * q
        nrm = np.linalg.norm(w)
        if nrm > tol * max(1.0, scale):
            basis.append(w / nrm)
    return len(basis)


def test_criterion_01_kalman_rank_agreement():
    """is_controllable == brute-force span of {(-A)^i B e_j}; 50/50, < 1 s."""
    t_start = time.perf_counter()
    rng = np.random.default_rng(101)
    agree = 0
    for trial in range(50):
        n = int(rng.integers(2, 6))
        m = int(rng.integers(1, n + 1))
        A = _random_psd(rng, n)
        if trial % 3 == 1:  # rank-deficient drift
            w, V = np.linalg.eigh(A)
            w[: n // 2 + 1] = 0.0
            A = V @ np.diag(w) @ V.T
            A = 0.5 * (A + A.T)
        B = rng.standard_normal((n, m))
        if trial % 4 == 2:  # dead input channel
            B[:, 0] = 0.0
        sys = ControlSystem(problem=QuadraticProblem(A=A, b=np.zeros(n), c=0.0),
                            B=B)
        vectors = []
        P = np.eye(n)
        for _ in range(n):
            for j in range(m):
                vectors.append(P @ B[:, j])
            P = -A @ P
        dim = _span_dim(vectors)
        report = is_controllable(sys)
        if report.rank == dim and report.controllable == (dim == n):
            agree += 1
    elapsed = time.perf_counter() - t_start
    assert agree == 50
    assert elapsed < 1.0, f"took {elapsed:.2f} s"


def test_criterion_02_gramian_steering():
    """Steering hits the target to 1e-5*(1+||xd||); an uncontrollable
    coordinate stays control-independent to 1e-10. Budget 30 s.

    Draws whose Gramian condition number exceeds 1e6 are redrawn: past
    that point the minimum-energy control is so large that quadrature and
    rounding errors amplified through W^{-1} exceed the target tolerance
    for *any* double-precision implementation (a nearly uncontrollable
    direction needs energy ~ 1/lambda_min(W)). The accepted set is still
    deterministic for the frozen seed.
    """
    t_start = time.perf_counter()
    rng = np.random.default_rng(202)
    accepted = 0
    while accepted < 20:
        n = int(rng.integers(2, 7))
        m = int(rng.integers(1, n + 1))
        A = _random_psd(rng, n)
        B = rng.standard_normal((n, m))
        sys = ControlSystem(problem=QuadraticProblem(A=A, b=rng.standard_normal(n),
                                                     c=0.0), B=B)
        x0 = rng.standard_normal(n)
        xd = rng.standard_normal(n)
        eigs = np.linalg.eigvalsh(gramian(sys, 1.0))
        if eigs[0] <= 0 or eigs[-1] / eigs[0] > 1e6:
            continue
        accepted += 1
        assert is_controllable(sys).controllable
        sig = steering_control(sys, x0, xd, 1.0)
        traj = integrate(sys, sig, x0, 0.0, 1.0, 4000)
        err = np.linalg.norm(traj.states[-1] - xd)
        assert err <= 1e-5 * (1.0 + np.linalg.norm(xd)), err

    # A = I2, B = (1, 0)^T, b = 0: the second coordinate cannot be moved
    sys = ControlSystem(problem=QuadraticProblem(A=np.eye(2), b=np.zeros(2), c=0.0),
                        B=np.array([[1.0], [0.0]]))
    assert not is_controllable(sys).controllable
    x0 = np.array([0.3, 1.7])
    knots = np.array([0.0, 0.25, 0.5, 0.75])
    sig_a = PiecewiseConstant(knots, np.array([[0.0], [2.0], [-1.0], [0.5]]))
    sig_b = PiecewiseConstant(knots, np.array([[5.0], [-3.0], [0.0], [1.0]]))
    traj_a = integrate(sys, sig_a, x0, 0.0, 1.0, 800)
    traj_b = integrate(sys, sig_b, x0, 0.0, 1.0, 800)
    free = x0[1] * np.exp(-traj_a.times)
    assert np.max(np.abs(traj_a.states[:, 1] - traj_b.states[:, 1])) <= 1e-10
    assert np.max(np.abs(traj_a.states[:, 1] - free)) <= 1e-10
    elapsed = time.perf_counter() - t_start
    assert elapsed < 30.0, f"took {elapsed:.2f} s"


def test_criterion_03_value_derivative_matches_finite_differences():
    """d/dt f(x_t) from the identity vs central differences: 1e-4 relative
    at every interior node of 10 trajectories."""
    rng = np.random.default_rng(303)
    steps = 1000
    for _ in range(10):
        n = int(rng.integers(2, 6))
        m = int(rng.integers(1, n + 1))
        A = _random_psd(rng, n)
        p = QuadraticProblem(A=A, b=rng.standard_normal(n), c=0.0)
        sys = ControlSystem(problem=p, B=rng.standard_normal((n, m)))
        u = 0.1 * rng.standard_normal(m)
        x0 = 2.0 * rng.standard_normal(n)
        traj = integrate(sys, ConstantControl(u), x0, 0.0, 1.0, steps)
        f = p.values(traj.states)
        h = traj.times[1] - traj.times[0]
        vd = np.array([value_derivative(p, sys, traj.states[k], u)
                       for k in range(1, steps)])
        # the gradient term dominates the control term for these draws,
        # so the derivative stays bounded away from zero and a pure
        # relative comparison is meaningful
        assert np.min(np.abs(vd)) > 1e-3
        fd = (f[2:] - f[:-2]) / (2.0 * h)
        assert np.max(np.abs(fd - vd) / np.abs(vd)) <= 1e-4


def test_criterion_04_characteristic_polynomial_annihilates():
    """P_char(A) vanishes: max-abs entry <= 1e-6 * ||A||^n, 200/200."""
    rng = np.random.default_rng(404)
    for _ in range(200):
        n = int(rng.integers(2, 9))
        A = rng.standard_normal((n, n))
        residual = np.max(np.abs(matrix_poly(char_poly(A), A)))
        assert residual <= 1e-6 * spectral_norm(A) ** n


def test_criterion_05_prox_resolvent_equivalence():
    """100 random queries: prox == resolvent to 1e-10*(1+||z||), and the
    prox matches an independent subproblem minimizer to 1e-7."""
    rng = np.random.default_rng(505)
    for _ in range(100):
        n = int(rng.integers(1, 9))
        m = int(rng.integers(0, 4))
        p = QuadraticProblem(A=_random_psd(rng, n), b=rng.standard_normal(n),
                             c=float(rng.standard_normal()))
        q = ProxQuery(problem=p, B=rng.standard_normal((n, m)),
                      u=rng.standard_normal(m),
                      gamma=float(rng.uniform(0.05, 5.0)),
                      z=rng.standard_normal(n))
        res = prox_resolvent_equivalence(q)
        assert res["max_abs_diff"] <= 1e-10 * (1.0 + np.linalg.norm(q.z))

        # plain GD on F(x) = f(x) + ||x - z||^2/(2 gamma) - <Bu, x>
        shift = q.B @ q.u
        x = q.z.copy()
        eta = 1.0 / (spectral_norm(p.A) + 1.0 / q.gamma)
        for _ in range(100_000):
            grad = p.gradient(x) + (x - q.z) / q.gamma - shift
            if np.linalg.norm(grad) <= 1e-10:
                break
            x = x - eta * grad
        assert np.linalg.norm(grad) <= 1e-10
        assert np.linalg.norm(x - controlled_prox(q)) <= 1e-7


def test_criterion_06_contraction_certificate_bounds_iterates():
    """50 systems, argmin-preserving feedback realizing K = design_feedback,
    gamma = 1/(2||A||+1): dist(k) <= contraction^k * dist(0) * (1+1e-8)
    for all k <= 200."""
    rng = np.random.default_rng(606)
    for _ in range(50):
        n = int(rng.integers(2, 9))
        m = int(rng.integers(1, n + 1))
        A = _random_psd(rng, n)
        # b = 0 keeps the closed-loop fixed point at the minimizer for
        # every gain, so the certificate applies verbatim
        sys = ControlSystem(problem=QuadraticProblem(A=A, b=np.zeros(n), c=0.0),
                            B=rng.standard_normal((n, m)))
        gamma = 1.0 / (2.0 * spectral_norm(A) + 1.0)
        cert = rate_certificate(sys, design_feedback(sys), gamma)
        assert cert.preserves_argmin
        ref = solve_critical(sys.problem)
        cfg = DescentConfig(gamma=gamma, max_iters=200, stop_tol=0.0)
        policy = GradientFeedbackPolicy(feedback_gradient_gain(sys))
        rec = run_descent(sys, policy, rng.standard_normal(n), cfg, ref=ref)
        k = np.arange(rec.iters_used + 1)
        bound = cert.contraction ** k * rec.dist_to_ref[0] * (1.0 + 1e-8)
        assert np.all(rec.dist_to_ref <= bound)


def test_criterion_07_oversampled_regime_both_recover(tmp_path):
    """Ratio 2.0, n = 128: plain and controlled descent both reach relative
    reconstruction error <= 1e-6 within 5000 iterations, 5 seeds, < 60 s."""
    t_start = time.perf_counter()
    spec = RegimeSpec(n=128, ratios=(2.0,))
    for seed in range(5):
        res = run_regime_experiment(spec, d=4, iters=5000, seed=seed)[0]
        xbar_norm = np.linalg.norm(
            generate_sensing(res.n, res.m, res.seed_problem).xbar)
        assert res.record_gd.dist_to_ref[-1] <= 1e-6 * xbar_norm
        assert res.record_cgd.dist_to_ref[-1] <= 1e-6 * xbar_norm
    elapsed = time.perf_counter() - t_start
    assert elapsed < 60.0, f"took {elapsed:.2f} s"


def test_criterion_08_undersampled_plateau_at_projection_distance():
    """Ratio 0.5: plain GD stalls at ||P_null(x0 - xbar)||, predicted
    analytically from the measurement nullspace, to 1e-6 relative. The
    controlled curve is produced alongside for inspection; no ordering
    between the two is asserted."""
    spec = RegimeSpec(n=128, ratios=(0.5,))
    res = run_regime_experiment(spec, d=4, iters=5000, seed=0)[0]
    sp = generate_sensing(res.n, res.m, res.seed_problem)
    rng = np.random.default_rng(res.seed_run)
    rng.standard_normal((res.n, res.d))  # skip the injection draw
    x0 = rng.standard_normal(res.n)

    _, s, Vt = np.linalg.svd(sp.Asense, full_matrices=True)
    assert s[res.m - 1] > 1e-8 * s[0]  # measurement rows are full rank
    null_basis = Vt[res.m:]
    predicted = np.linalg.norm(null_basis @ (x0 - sp.xbar))
    plateau = res.record_gd.dist_to_ref[-1]
    assert abs(plateau - predicted) <= 1e-6 * predicted
    assert res.record_cgd.dist_to_ref.shape == (5001,)
    assert np.all(np.isfinite(res.record_cgd.dist_to_ref))


def test_criterion_09_gaussian_injection_rank_bracket():
    """n = 32, m = 64, d in {1, 2, 4}, 20 trials each: every draw satisfies
    d <= kalman_rank <= min(n, n*d)."""
    table = gaussian_controllability_sweep(32, 64, (1, 2, 4), 20, seed=0)
    assert [row["d"] for row in table] == [1, 2, 4]
    for row in table:
        assert row["trials"] == 20
        assert row["frac_lower_ok"] == 1.0
        assert row["frac_upper_ok"] == 1.0


def test_criterion_10_determinism_selftest_and_manifest_replay(tmp_path):
    """selftest passes, and re-running an experiment from its manifest
    reproduces the output files byte for byte."""
    assert main(["selftest"]) == 0
    outdir = tmp_path / "cs"
    assert main(["cs", "--n", "16", "--ratios", "2.0,0.5", "--d", "2",
                 "--iters", "50", "--seed", "9", "--outdir", str(outdir)]) == 0
    csvs = sorted(p for p in outdir.iterdir() if p.suffix == ".csv")
    assert len(csvs) == 2
    before = {p.name: p.read_bytes() for p in csvs}
    for p in csvs:
        p.unlink()
    assert main(["--from-manifest", str(outdir / "manifest.json")]) == 0
    after = {p.name: p.read_bytes()
             for p in outdir.iterdir() if p.suffix == ".csv"}
    assert after == before
