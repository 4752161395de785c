"""Gaussian compressed-sensing benchmark for controlled gradient descent.

Builds least-squares recovery problems f(x) = 1/(2m) ||A_sense x - y||^2
from noiseless Gaussian measurements, runs plain and controlled descent
across sampling regimes (oversampled m > n, sampled m ~ n, undersampled
m < n), and sweeps the Kalman rank of random (A, B) pairs.

Randomness contract
-------------------
All draws use NumPy's default_rng (PCG64) seeded with 64-bit integers.
Derived streams come from SeedSequence([root_seed, *tags]) so that every
regime/trial owns an independent, documented stream. Draw orders:

- generate_sensing(seed): (1) A_sense of shape (m, n) row-major via
  standard_normal; (2) the signal: gaussian -> xbar (n,) standard_normal;
  spike:k -> support = rng.choice(n, size=k, replace=False), then
  signs = rng.integers(0, 2, size=k) mapped to {-1, +1}.
- run_regime_experiment, regime index i: problem seed = derive(seed, 2i),
  run seed = derive(seed, 2i+1); from the run stream: (1) B of shape
  (n, d) standard_normal; (2) x0 (n,) standard_normal.
- gaussian_controllability_sweep: trial t at injection width d uses
  gaussian_rank_check(seed=derive(seed, d, t)).
"""

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .controllability import ControlSystem, gaussian_rank_check, is_controllable
from .descent import DescentConfig, ControlPolicy, GradientFeedbackPolicy, ZeroPolicy, greedy_gain, run_descent
from .errors import InvalidParameterError
from .linalg import spectral_norm
from .quadratic import QuadraticProblem
from . import serialize

__all__ = [
    "SensingProblem",
    "RegimeSpec",
    "RegimeResult",
    "derive_seed",
    "generate_sensing",
    "to_quadratic",
    "lipschitz_estimate",
    "run_regime_experiment",
    "gaussian_controllability_sweep",
]


def derive_seed(root, *tags):
    """Independent 64-bit child seed for (root, tags); order-sensitive."""
    ss = np.random.SeedSequence([int(root)] + [int(t) for t in tags])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(eq=False)
class SensingProblem:
    """Noiseless measurements y = A_sense @ xbar; reproducible from seed."""

    Asense: np.ndarray
    xbar: np.ndarray
    y: np.ndarray
    seed: int

    @property
    def n(self):
        return self.Asense.shape[1]

    @property
    def m(self):
        return self.Asense.shape[0]


def _parse_signal(signal, n, rng):
    if signal == "gaussian":
        return rng.standard_normal(n)
    if isinstance(signal, str) and signal.startswith("spike:"):
        try:
            k = int(signal.split(":", 1)[1])
        except ValueError:
            raise InvalidParameterError(f"bad spike count in signal {signal!r}") from None
        if k < 1 or k > n:
            raise InvalidParameterError(f"spike count must be in 1..{n}, got {k}")
        support = rng.choice(n, size=k, replace=False)
        signs = 2.0 * rng.integers(0, 2, size=k) - 1.0
        xbar = np.zeros(n)
        xbar[support] = signs
        return xbar
    raise InvalidParameterError(
        f"signal must be 'gaussian' or 'spike:<k>', got {signal!r}"
    )


def generate_sensing(n, m, seed, signal="gaussian"):
    """Draw a sensing problem; see the module docstring for the draw order."""
    n = int(n)
    m = int(m)
    if n < 1 or m < 1:
        raise InvalidParameterError(f"need n, m >= 1, got {(n, m)}")
    rng = np.random.default_rng(int(seed))
    Asense = rng.standard_normal((m, n))
    xbar = _parse_signal(signal, n, rng)
    y = Asense @ xbar
    return SensingProblem(Asense=Asense, xbar=xbar, y=y, seed=int(seed))


def to_quadratic(sp):
    """Quadratic form of the recovery objective 1/(2m) ||A_sense x - y||^2.

    A = (1/m) A_sense^T A_sense, b = -(1/m) A_sense^T y, c = (1/2m)||y||^2,
    so value and gradient stay mutually consistent (both carry the 1/m).
    """
    m = sp.m
    M = sp.Asense.T @ sp.Asense / m
    A = 0.5 * (M + M.T)
    b = -(sp.Asense.T @ sp.y) / m
    c = 0.5 * float(sp.y @ sp.y) / m
    return QuadraticProblem(A=A, b=b, c=c)


def lipschitz_estimate(sp):
    """Gradient Lipschitz constant of the recovery objective.

    Returns {"exact": lambda_max((1/m) A_sense^T A_sense), "sqrt_m":
    sqrt(m)}. The square-root heuristic is reported side by side for
    comparison only; it has the wrong scale once the 1/m normalization is
    honored (exact concentrates near (1 + sqrt(n/m))^2, not sqrt(m)).
    """
    return {
        "exact": float(spectral_norm(to_quadratic(sp).A)),
        "sqrt_m": float(np.sqrt(sp.m)),
    }


@dataclass(eq=False)
class RegimeSpec:
    """Sampling regimes as measurement ratios m/n (m = round(ratio*n))."""

    n: int = 128
    ratios: tuple = (2.0, 1.0, 0.5)

    def __post_init__(self):
        self.n = int(self.n)
        if self.n < 1:
            raise InvalidParameterError(f"n must be >= 1, got {self.n}")
        ratios = tuple(float(r) for r in self.ratios)
        if not ratios:
            raise InvalidParameterError("need at least one ratio")
        if any(not (np.isfinite(r) and r > 0) for r in ratios):
            raise InvalidParameterError(f"ratios must be positive, got {ratios}")
        self.ratios = ratios


@dataclass(eq=False)
class RegimeResult:
    ratio: float
    n: int
    m: int
    d: int
    seed_problem: int
    seed_run: int
    lipschitz: dict
    gamma: float
    kalman_rank: int
    controllable: bool
    record_gd: object
    record_cgd: object
    csv_path: Optional[str] = None


_CSV_COLUMNS = ("iter", "l2_error_gd", "l2_error_cgd", "f_gd", "f_cgd")


def _regime_rows(rec_gd, rec_cgd):
    rows = max(rec_gd.iters_used, rec_cgd.iters_used) + 1

    def cell(arr, k):
        return float(arr[min(k, len(arr) - 1)])

    for k in range(rows):
        yield (k,
               cell(rec_gd.dist_to_ref, k), cell(rec_cgd.dist_to_ref, k),
               cell(rec_gd.f_value, k), cell(rec_cgd.f_value, k))


def run_regime_experiment(spec, d, policy=None, iters=5000, seed=0,
                          signal="gaussian", outdir=None):
    """Plain vs controlled descent across the sampling regimes of ``spec``.

    Per regime: draw the sensing problem and a Gaussian injection B of
    width d, set gamma = 1/L_exact, then run the zero policy and the
    controlled policy from the same x0, recording ||x_k - xbar|| (the
    reconstruction error) and f. ``policy`` may be None (default: one-step
    optimal gradient feedback, GradientFeedbackPolicy(greedy_gain(sys,
    gamma))), a ControlPolicy used as-is, or a callable (sys, gamma) ->
    ControlPolicy evaluated per regime. d = 0 runs the degenerate
    controlled system (no channels), which reproduces plain GD exactly.

    With ``outdir`` set, one CSV per regime named regime_<ratio>.csv is
    written with columns iter, l2_error_gd, l2_error_cgd, f_gd, f_cgd.
    Everything is deterministic given (spec, d, policy, iters, seed).
    """
    d = int(d)
    if d < 0:
        raise InvalidParameterError(f"d must be >= 0, got {d}")
    iters = int(iters)
    results = []
    for i, ratio in enumerate(spec.ratios):
        m = max(1, int(round(ratio * spec.n)))
        seed_problem = derive_seed(seed, 2 * i)
        seed_run = derive_seed(seed, 2 * i + 1)
        sp = generate_sensing(spec.n, m, seed_problem, signal)
        problem = to_quadratic(sp)
        rng = np.random.default_rng(seed_run)
        B = rng.standard_normal((spec.n, d))
        x0 = rng.standard_normal(spec.n)
        sys = ControlSystem(problem=problem, B=B)
        lip = lipschitz_estimate(sp)
        gamma = 1.0 / lip["exact"]
        cfg = DescentConfig(gamma=gamma, max_iters=iters, stop_tol=0.0)
        if policy is None:
            run_policy = GradientFeedbackPolicy(greedy_gain(sys, gamma))
        elif isinstance(policy, ControlPolicy):
            run_policy = policy
        else:
            run_policy = policy(sys, gamma)
        rec_gd = run_descent(sys, ZeroPolicy(), x0, cfg, ref=sp.xbar)
        rec_cgd = run_descent(sys, run_policy, x0, cfg, ref=sp.xbar)
        report = is_controllable(sys)
        csv_path = None
        if outdir is not None:
            csv_path = os.path.join(outdir, f"regime_{ratio}.csv")
            serialize.write_csv(csv_path, _CSV_COLUMNS, _regime_rows(rec_gd, rec_cgd))
        results.append(RegimeResult(
            ratio=ratio, n=spec.n, m=m, d=d,
            seed_problem=seed_problem, seed_run=seed_run,
            lipschitz=lip, gamma=gamma,
            kalman_rank=report.rank, controllable=report.controllable,
            record_gd=rec_gd, record_cgd=rec_cgd, csv_path=csv_path,
        ))
    return results


def gaussian_controllability_sweep(n, m, d_values, trials, seed):
    """Kalman-rank statistics over random (A, B): one row per channel width d.

    Each row aggregates ``trials`` independent draws: min/max/mean rank
    and the fraction of trials satisfying the bracketing bounds
    d <= rank <= min(n, n*d). trials = 0 yields an empty table.
    """
    trials = int(trials)
    if trials < 0:
        raise InvalidParameterError(f"trials must be >= 0, got {trials}")
    table = []
    if trials == 0:
        return table
    for d in d_values:
        d = int(d)
        ranks = []
        lower = 0
        upper = 0
        for t in range(trials):
            res = gaussian_rank_check(n, m, d, derive_seed(seed, d, t))
            ranks.append(res["rank"])
            lower += bool(res["lower_ok"])
            upper += bool(res["upper_ok"])
        table.append({
            "n": int(n), "m": int(m), "d": d, "trials": trials,
            "min_rank": int(min(ranks)),
            "max_rank": int(max(ranks)),
            "mean_rank": float(np.mean(ranks)),
            "frac_lower_ok": lower / trials,
            "frac_upper_ok": upper / trials,
        })
    return table
