"""Gaussian sensing benchmark: generation, quadratic form, regime runs."""

import numpy as np
import pytest

from ctrlgrad.descent import ZeroPolicy
from ctrlgrad.errors import InvalidParameterError
from ctrlgrad.linalg import spectral_norm
from ctrlgrad.sensing import (
    RegimeSpec,
    SensingProblem,
    derive_seed,
    gaussian_controllability_sweep,
    generate_sensing,
    lipschitz_estimate,
    run_regime_experiment,
    to_quadratic,
)


# ---------------------------------------------------------------------------
# generation


def test_generate_deterministic_bytes():
    a = generate_sensing(16, 24, seed=123)
    b = generate_sensing(16, 24, seed=123)
    assert a.Asense.tobytes() == b.Asense.tobytes()
    assert a.xbar.tobytes() == b.xbar.tobytes()
    assert a.y.tobytes() == b.y.tobytes()
    c = generate_sensing(16, 24, seed=124)
    assert a.Asense.tobytes() != c.Asense.tobytes()


def test_measurements_exactly_consistent():
    sp = generate_sensing(32, 48, seed=5)
    np.testing.assert_array_equal(sp.y, sp.Asense @ sp.xbar)


def test_paper_scale_dims():
    sp = generate_sensing(128, 256, seed=42)
    assert sp.Asense.shape == (256, 128)
    assert sp.xbar.shape == (128,)
    assert sp.y.shape == (256,)
    assert sp.n == 128 and sp.m == 256


def test_spike_signal():
    sp = generate_sensing(64, 32, seed=9, signal="spike:5")
    nz = sp.xbar[sp.xbar != 0]
    assert nz.shape == (5,)
    assert set(np.unique(nz)) <= {-1.0, 1.0}


def test_spike_deterministic():
    a = generate_sensing(64, 32, seed=9, signal="spike:5")
    b = generate_sensing(64, 32, seed=9, signal="spike:5")
    np.testing.assert_array_equal(a.xbar, b.xbar)


def test_generate_validation():
    with pytest.raises(InvalidParameterError):
        generate_sensing(0, 4, seed=0)
    with pytest.raises(InvalidParameterError):
        generate_sensing(4, 0, seed=0)
    with pytest.raises(InvalidParameterError):
        generate_sensing(4, 4, seed=0, signal="spike:5")  # k > n
    with pytest.raises(InvalidParameterError):
        generate_sensing(4, 4, seed=0, signal="spike:0")
    with pytest.raises(InvalidParameterError):
        generate_sensing(4, 4, seed=0, signal="spike:lots")
    with pytest.raises(InvalidParameterError):
        generate_sensing(4, 4, seed=0, signal="fourier")


def test_derive_seed_order_sensitive():
    assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert 0 <= derive_seed(0) < 2**64


# ---------------------------------------------------------------------------
# quadratic form


def test_quadratic_vanishes_at_signal():
    sp = generate_sensing(24, 48, seed=3)
    p = to_quadratic(sp)
    assert abs(p.value(sp.xbar)) <= 1e-12 * (1.0 + p.c)
    assert np.linalg.norm(p.gradient(sp.xbar)) <= 1e-10 * (1.0 + np.linalg.norm(sp.xbar))


def test_quadratic_hand_instance():
    # Asense = I2 (m = 2): A = I/2, b = -y/2, c = ||y||^2/4
    sp = SensingProblem(Asense=np.eye(2), xbar=np.array([3.0, -1.0]),
                        y=np.array([3.0, -1.0]), seed=0)
    p = to_quadratic(sp)
    np.testing.assert_array_equal(p.A, 0.5 * np.eye(2))
    np.testing.assert_array_equal(p.b, [-1.5, 0.5])
    assert p.c == 2.5
    np.testing.assert_allclose(p.gradient(np.array([1.0, 1.0])),
                               [0.5 - 1.5, 0.5 + 0.5], atol=1e-15)


def test_quadratic_top_eigenvalue_identity():
    sp = generate_sensing(20, 35, seed=11)
    lam = spectral_norm(to_quadratic(sp).A)
    sigma = spectral_norm(sp.Asense)
    assert abs(lam - sigma**2 / sp.m) <= 1e-8


def test_lipschitz_identity_sensing():
    sp = SensingProblem(Asense=np.eye(4), xbar=np.ones(4), y=np.ones(4), seed=0)
    est = lipschitz_estimate(sp)
    assert est["exact"] == pytest.approx(0.25, rel=1e-10)
    assert est["sqrt_m"] == 2.0


def test_lipschitz_marchenko_pastur_edge():
    # m = 4n: lambda_max concentrates near (1 + sqrt(1/4))^2 = 2.25
    sp = generate_sensing(128, 512, seed=19)
    est = lipschitz_estimate(sp)
    assert 0.8 * 2.25 <= est["exact"] <= 1.2 * 2.25


def test_lipschitz_sqrt_m():
    sp = generate_sensing(128, 256, seed=1)
    assert lipschitz_estimate(sp)["sqrt_m"] == 16.0


def test_oversampled_strongly_convex():
    for seed in range(10):
        sp = generate_sensing(64, 128, seed=seed)
        lam_min = np.linalg.eigvalsh(to_quadratic(sp).A)[0]
        assert lam_min > 1e-3


def test_undersampled_nullspace_gradient():
    sp = generate_sensing(32, 16, seed=7)
    p = to_quadratic(sp)
    _, _, Vt = np.linalg.svd(sp.Asense)
    for v in Vt[16:]:  # nullspace basis rows
        assert np.linalg.norm(p.gradient(sp.xbar + 3.0 * v)) <= 1e-8


# ---------------------------------------------------------------------------
# regime experiment


def test_oversampled_both_methods_recover():
    spec = RegimeSpec(n=128, ratios=(2.0,))
    (res,) = run_regime_experiment(spec, d=4, iters=5000, seed=7)
    scale = np.linalg.norm(
        generate_sensing(128, res.m, res.seed_problem).xbar
    )
    assert res.record_gd.dist_to_ref[-1] <= 1e-6 * scale
    assert res.record_cgd.dist_to_ref[-1] <= 1e-6 * scale
    assert res.m == 256
    assert res.gamma == pytest.approx(1.0 / res.lipschitz["exact"])


def test_undersampled_plateau_is_nullspace_distance():
    """Plain GD stalls at ||P_null(x0 - xbar)||: it never moves off the
    affine slice x0 + rowspace."""
    spec = RegimeSpec(n=64, ratios=(0.5,))
    (res,) = run_regime_experiment(spec, d=2, iters=5000, seed=21)
    sp = generate_sensing(64, res.m, res.seed_problem)
    rng = np.random.default_rng(res.seed_run)
    rng.standard_normal((64, res.d))  # skip B, drawn first
    x0 = rng.standard_normal(64)
    _, _, Vt = np.linalg.svd(sp.Asense)
    null_basis = Vt[res.m:]
    plateau = np.linalg.norm(null_basis.T @ (null_basis @ (x0 - sp.xbar)))
    assert plateau > 0.1  # generic x0: genuinely stuck
    assert res.record_gd.dist_to_ref[-1] == pytest.approx(plateau, rel=1e-6)


def test_zero_channel_width_reduces_to_plain_gd():
    spec = RegimeSpec(n=32, ratios=(1.0,))
    (res,) = run_regime_experiment(spec, d=0, iters=300, seed=3)
    gd, cgd = res.record_gd, res.record_cgd
    np.testing.assert_array_equal(gd.final_x, cgd.final_x)
    np.testing.assert_array_equal(gd.f_value, cgd.f_value)
    np.testing.assert_array_equal(gd.grad_norm, cgd.grad_norm)
    np.testing.assert_array_equal(gd.dist_to_ref, cgd.dist_to_ref)


def test_gd_objective_monotone():
    spec = RegimeSpec(n=48, ratios=(1.0, 0.5))
    results = run_regime_experiment(spec, d=2, iters=400, seed=13)
    for res in results:
        assert np.all(np.diff(res.record_gd.f_value) <= 1e-12)


def test_explicit_policy_and_callable_policy():
    spec = RegimeSpec(n=24, ratios=(1.0,))
    (a,) = run_regime_experiment(spec, d=2, iters=100, seed=5, policy=ZeroPolicy())
    (b,) = run_regime_experiment(spec, d=2, iters=100, seed=5,
                                 policy=lambda sys, gamma: ZeroPolicy())
    np.testing.assert_array_equal(a.record_cgd.final_x, b.record_cgd.final_x)
    np.testing.assert_array_equal(a.record_cgd.final_x, a.record_gd.final_x)


def test_regime_csv_output(tmp_path):
    spec = RegimeSpec(n=16, ratios=(2.0, 0.5))
    results = run_regime_experiment(spec, d=1, iters=50, seed=9,
                                    outdir=str(tmp_path))
    for res in results:
        path = tmp_path / f"regime_{res.ratio}.csv"
        assert str(path) == res.csv_path
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "iter,l2_error_gd,l2_error_cgd,f_gd,f_cgd"
        assert len(lines) == 52  # header + iters+1 rows
        first = lines[1].split(",")
        assert first[0] == "0"
        assert float(first[1]) == res.record_gd.dist_to_ref[0]
        assert float(first[3]) == res.record_gd.f_value[0]


def test_regime_experiment_deterministic(tmp_path):
    spec = RegimeSpec(n=16, ratios=(1.0,))
    d1 = tmp_path / "a"
    d2 = tmp_path / "b"
    d1.mkdir()
    d2.mkdir()
    run_regime_experiment(spec, d=2, iters=60, seed=77, outdir=str(d1))
    run_regime_experiment(spec, d=2, iters=60, seed=77, outdir=str(d2))
    assert (d1 / "regime_1.0.csv").read_bytes() == (d2 / "regime_1.0.csv").read_bytes()


def test_regime_spec_validation():
    with pytest.raises(InvalidParameterError):
        RegimeSpec(n=0)
    with pytest.raises(InvalidParameterError):
        RegimeSpec(n=8, ratios=())
    with pytest.raises(InvalidParameterError):
        RegimeSpec(n=8, ratios=(1.0, -0.5))
    with pytest.raises(InvalidParameterError):
        run_regime_experiment(RegimeSpec(n=8), d=-1)


def test_controlled_run_first_step_and_monotone():
    """Greedy feedback is one-step optimal from a shared state: its first
    step cannot lose to plain GD, and its own objective never increases.
    (Pointwise domination at later k is NOT guaranteed -- the greedy
    trajectory is myopic and the paths diverge after step one.)"""
    spec = RegimeSpec(n=32, ratios=(2.0,))
    (res,) = run_regime_experiment(spec, d=4, iters=300, seed=15)
    assert res.record_cgd.f_value[1] <= res.record_gd.f_value[1] + 1e-10
    assert np.all(np.diff(res.record_cgd.f_value) <= 1e-12)


# ---------------------------------------------------------------------------
# rank sweep


def test_sweep_lower_bound_always_met():
    table = gaussian_controllability_sweep(32, 64, (1, 2, 4), trials=20, seed=0)
    assert [row["d"] for row in table] == [1, 2, 4]
    for row in table:
        assert row["trials"] == 20
        assert row["frac_lower_ok"] == 1.0
        assert row["frac_upper_ok"] == 1.0
        assert row["min_rank"] >= row["d"]
        assert row["max_rank"] <= 32


def test_sweep_square_case_full_rank():
    table = gaussian_controllability_sweep(4, 4, (4,), trials=10, seed=2)
    assert table[0]["min_rank"] == 4
    assert table[0]["mean_rank"] == 4.0


def test_sweep_empty():
    assert gaussian_controllability_sweep(8, 8, (1, 2), trials=0, seed=0) == []
    with pytest.raises(InvalidParameterError):
        gaussian_controllability_sweep(8, 8, (1,), trials=-1, seed=0)
