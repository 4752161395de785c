"""Command-line interface: one executable, six subcommands, deterministic I/O.

Subcommands: controllability, flow, descend, prox, cs, selftest.

Exit codes: 0 success; 1 usage error (bad flags, bad parameter values,
dimension mismatches); 2 numerical contract violation (asymmetric or
indefinite A, infeasible steering, ill-conditioned Gramian, failed
selftest); 3 I/O error (missing or malformed files).

Seeding: commands that draw randomness take --seed; when omitted, the
CTRLGRAD_SEED environment variable is used, then 0. The resolved seed is
recorded in the manifest, so replays never depend on the environment.

Manifests: every invocation that writes output files also writes a
manifest JSON (<out>.manifest.json, or manifest.json inside --outdir)
recording the tool version, the canonical argv, parameters, seeds, input
and output digests, and wall-clock time. `ctrlgrad --from-manifest
<manifest>` re-executes that canonical argv; outputs are byte-identical
on the same platform.

`--out -` writes tabular/JSON results to stdout instead of a file.
"""

import argparse
import os
import sys
import time

import numpy as np

from . import __version__, kernels, serialize
from .controllability import is_controllable
from .descent import (
    ConstantPolicy,
    DescentConfig,
    GradientFeedbackPolicy,
    StateFeedbackPolicy,
    ZeroPolicy,
    design_feedback,
    feedback_gradient_gain,
    rate_bound_curve,
    rate_certificate,
    run_descent,
)
from .errors import (
    ContractViolationError,
    CtrlgradError,
    InvalidParameterError,
    NoCriticalPointError,
    SchemaError,
)
from .flow import integrate, steering_control
from .prox import ProxQuery, prox_resolvent_equivalence
from .quadratic import solve_critical
from .selftest import run_selftest
from .sensing import RegimeSpec, run_regime_experiment
from .signals import ZeroControl

__all__ = ["main"]


def _parse_vector(text, name):
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise InvalidParameterError(
            f"{name}: expected comma-separated numbers, got {text!r}"
        ) from None
    if not values:
        raise InvalidParameterError(f"{name}: empty vector")
    return np.array(values)


def _parse_ratios(text):
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError:
        raise InvalidParameterError(
            f"--ratios: expected comma-separated numbers, got {text!r}"
        ) from None


def _resolve_seed(args):
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get("CTRLGRAD_SEED", "")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InvalidParameterError(
                f"CTRLGRAD_SEED must be an integer, got {env!r}"
            ) from None
    return 0


def _write_table(out, header, rows):
    if out == "-":
        serialize.write_csv(sys.stdout, header, rows)
    else:
        serialize.write_csv(out, header, rows)


def _emit_json(out, obj):
    text = serialize.dump_json(obj)
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _write_manifest(path, subcommand, argv, params, seed, inputs, outputs, t_start):
    manifest = {
        "tool": "ctrlgrad",
        "version": __version__,
        "subcommand": subcommand,
        "argv": list(argv),
        "parameters": params,
        "seed": seed,
        "inputs": {p: serialize.sha256_file(p) for p in inputs},
        "outputs": {p: serialize.sha256_file(p) for p in outputs},
        "environment": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "backend": kernels.BACKEND,
        },
        "wall_clock_s": time.perf_counter() - t_start,
    }
    serialize.write_json_atomic(path, manifest)


def _load_gain_file(path, m, n):
    import json

    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    return serialize._matrix_from_json(data, m, n, "/gain")


def _cmd_controllability(args):
    t0 = time.perf_counter()
    system = serialize.load_system(args.system)
    report = is_controllable(system, args.tol_rel)
    payload = {
        "n": system.n,
        "m": system.m,
        "rank": report.rank,
        "controllable": report.controllable,
        "tol_used": report.tol_used,
        "kalman": [float(v) for v in report.kalman.ravel()],
    }
    _emit_json(args.out, payload)
    if args.out != "-":
        argv = ["controllability", "--system", args.system, "--out", args.out]
        if args.tol_rel is not None:
            argv[3:3] = ["--tol-rel", repr(args.tol_rel)]
        _write_manifest(args.out + ".manifest.json", "controllability", argv,
                        {"system": args.system, "tol_rel": args.tol_rel,
                         "out": args.out},
                        None, [args.system], [args.out], t0)
    return 0


def _cmd_flow(args):
    t_start = time.perf_counter()
    system = serialize.load_system(args.system)
    x0 = _parse_vector(args.x0, "--x0")
    if args.target is not None:
        xd = _parse_vector(args.target, "--target")
        sig = steering_control(system, x0, xd, args.t1 - args.t0, t0=args.t0)
    else:
        sig = ZeroControl(system.m)
    traj = integrate(system, sig, x0, args.t0, args.t1, args.steps)
    fvals = system.problem.values(traj.states)
    header = (["t"] + [f"x_{i}" for i in range(system.n)]
              + [f"u_{j}" for j in range(system.m)] + ["f_value"])

    def rows():
        for k in range(traj.times.shape[0]):
            yield ([traj.times[k]] + list(traj.states[k]) + list(traj.controls[k])
                   + [fvals[k]])

    _write_table(args.out, header, rows())
    if args.out != "-":
        argv = ["flow", "--system", args.system, "--x0", args.x0]
        if args.target is not None:
            argv += ["--target", args.target]
        argv += ["--t0", repr(args.t0), "--t1", repr(args.t1),
                 "--steps", str(args.steps), "--out", args.out]
        _write_manifest(args.out + ".manifest.json", "flow", argv,
                        {"system": args.system, "x0": args.x0,
                         "target": args.target, "t0": args.t0, "t1": args.t1,
                         "steps": args.steps, "out": args.out},
                        None, [args.system], [args.out], t_start)
    return 0


def _build_policy(args, system):
    if args.policy == "zero":
        return ZeroPolicy(), np.zeros((system.m, system.n))
    if args.policy == "constant":
        if args.control is None:
            raise InvalidParameterError("--policy constant requires --control")
        return ConstantPolicy(_parse_vector(args.control, "--control")), \
            np.zeros((system.m, system.n))
    if args.gain == "auto":
        gain = (design_feedback(system) if args.policy == "state-fb"
                else feedback_gradient_gain(system))
    else:
        gain = _load_gain_file(args.gain, system.m, system.n)
    if args.policy == "state-fb":
        return StateFeedbackPolicy(gain), gain
    return GradientFeedbackPolicy(gain), gain @ system.problem.A


def _cmd_descend(args):
    t_start = time.perf_counter()
    system = serialize.load_system(args.system)
    gamma = args.gamma
    if gamma is None:
        from .linalg import spectral_norm

        L = spectral_norm(system.problem.A)
        gamma = 1.0 / (2.0 * L) if L > 0 else 1.0
    cfg = DescentConfig(gamma=gamma, max_iters=args.iters,
                        stop_tol=args.stop_tol, coupling=args.coupling)
    x0 = (_parse_vector(args.x0, "--x0") if args.x0 is not None
          else np.zeros(system.n))
    policy, k_equiv = _build_policy(args, system)
    try:
        ref = solve_critical(system.problem)
    except NoCriticalPointError:
        ref = None
    rec = run_descent(system, policy, x0, cfg, ref=ref)
    bound = None
    if ref is not None:
        try:
            cert = rate_certificate(system, k_equiv, cfg.gamma)
            bound = rate_bound_curve(cert.tau, cfg.gamma, rec.dist_to_ref[0],
                                     rec.iters_used).values
        except NoCriticalPointError:
            bound = None
    header = ["iter", "f_value", "grad_norm", "dist_to_ref", "control_norm",
              "bound_value"]
    nan = float("nan")

    def rows():
        for k in range(rec.iters_used + 1):
            yield [k, rec.f_value[k], rec.grad_norm[k],
                   rec.dist_to_ref[k] if rec.dist_to_ref is not None else nan,
                   rec.control_norm[k],
                   bound[k] if bound is not None else nan]

    _write_table(args.out, header, rows())
    if args.out != "-":
        argv = ["descend", "--system", args.system, "--policy", args.policy,
                "--gain", args.gain, "--gamma", repr(cfg.gamma),
                "--coupling", args.coupling, "--iters", str(args.iters),
                "--stop-tol", repr(args.stop_tol)]
        if args.control is not None:
            argv += ["--control", args.control]
        if args.x0 is not None:
            argv += ["--x0", args.x0]
        argv += ["--out", args.out]
        inputs = [args.system] + ([args.gain] if args.gain != "auto" else [])
        _write_manifest(args.out + ".manifest.json", "descend", argv,
                        {"system": args.system, "policy": args.policy,
                         "gain": args.gain, "gamma": cfg.gamma,
                         "coupling": args.coupling, "iters": args.iters,
                         "stop_tol": args.stop_tol, "control": args.control,
                         "x0": args.x0, "out": args.out},
                        None, inputs, [args.out], t_start)
    return 0


def _cmd_prox(args):
    system = serialize.load_system(args.system)
    z = _parse_vector(args.z, "--z")
    u = _parse_vector(args.u, "--u")
    q = ProxQuery(problem=system.problem, B=system.B, u=u, gamma=args.gamma, z=z)
    res = prox_resolvent_equivalence(q)
    _emit_json("-", {
        "prox": [float(v) for v in res["prox"]],
        "resolvent": [float(v) for v in res["resolvent"]],
        "max_abs_diff": res["max_abs_diff"],
    })
    return 0


def _cmd_cs(args):
    t_start = time.perf_counter()
    seed = _resolve_seed(args)
    spec = RegimeSpec(n=args.n, ratios=_parse_ratios(args.ratios))
    policy = None if args.policy == "grad-fb" else ZeroPolicy()
    os.makedirs(args.outdir, exist_ok=True)
    results = run_regime_experiment(spec, args.d, policy=policy,
                                    iters=args.iters, seed=seed,
                                    signal=args.signal, outdir=args.outdir)
    argv = ["cs", "--n", str(args.n), "--ratios", args.ratios,
            "--d", str(args.d), "--signal", args.signal,
            "--policy", args.policy, "--iters", str(args.iters),
            "--seed", str(seed), "--outdir", args.outdir]
    regimes = [{
        "ratio": r.ratio, "m": r.m, "seed_problem": r.seed_problem,
        "seed_run": r.seed_run, "lipschitz": r.lipschitz, "gamma": r.gamma,
        "kalman_rank": r.kalman_rank, "controllable": r.controllable,
        "csv": r.csv_path,
    } for r in results]
    _write_manifest(os.path.join(args.outdir, "manifest.json"), "cs", argv,
                    {"n": args.n, "ratios": args.ratios, "d": args.d,
                     "signal": args.signal, "policy": args.policy,
                     "iters": args.iters, "outdir": args.outdir,
                     "regimes": regimes},
                    seed, [], [r.csv_path for r in results], t_start)
    return 0


def _cmd_selftest(args):
    return 0 if run_selftest() else 2


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ctrlgrad",
        description="Controlled gradient flow and descent on quadratic objectives.",
    )
    parser.add_argument("--version", action="version", version=f"ctrlgrad {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("controllability", help="Kalman rank report for a system")
    p.add_argument("--system", required=True, help="ControlSystem JSON file")
    p.add_argument("--tol-rel", type=float, default=None, dest="tol_rel",
                   help="relative rank tolerance (default: size-scaled)")
    p.add_argument("--out", default="-", help="report JSON path, '-' for stdout")
    p.set_defaults(func=_cmd_controllability)

    p = sub.add_parser("flow", help="integrate the controlled gradient flow")
    p.add_argument("--system", required=True)
    p.add_argument("--x0", required=True, help="initial state, comma-separated")
    p.add_argument("--target", default=None,
                   help="steer to this state at t1 (minimum-energy control)")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--out", default="-", help="trajectory CSV path, '-' for stdout")
    p.set_defaults(func=_cmd_flow)

    p = sub.add_parser("descend", help="run (controlled) gradient descent")
    p.add_argument("--system", required=True)
    p.add_argument("--policy", choices=["zero", "constant", "state-fb", "grad-fb"],
                   default="zero")
    p.add_argument("--gain", default="auto",
                   help="'auto' or a JSON matrix file (m x n), for *-fb policies")
    p.add_argument("--control", default=None,
                   help="constant control vector, comma-separated")
    p.add_argument("--gamma", type=float, default=None,
                   help="step size (default 1/(2L))")
    p.add_argument("--coupling", choices=["euler", "paper"], default="euler")
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--stop-tol", type=float, default=0.0, dest="stop_tol")
    p.add_argument("--x0", default=None, help="start state (default: zeros)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_descend)

    p = sub.add_parser("prox", help="controlled prox / resolvent query")
    p.add_argument("--system", required=True)
    p.add_argument("--z", required=True, help="query point, comma-separated")
    p.add_argument("--u", required=True, help="control vector, comma-separated")
    p.add_argument("--gamma", type=float, required=True)
    p.set_defaults(func=_cmd_prox)

    p = sub.add_parser("cs", help="compressed-sensing regime experiment")
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--ratios", default="2.0,1.0,0.5")
    p.add_argument("--d", type=int, default=4, help="control channels")
    p.add_argument("--signal", default="gaussian",
                   help="'gaussian' or 'spike:<k>'")
    p.add_argument("--policy", choices=["grad-fb", "zero"], default="grad-fb")
    p.add_argument("--iters", type=int, default=5000)
    p.add_argument("--seed", type=int, default=None,
                   help="64-bit seed (default: CTRLGRAD_SEED, then 0)")
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=_cmd_cs)

    p = sub.add_parser("selftest", help="run the embedded invariant suite")
    p.set_defaults(func=_cmd_selftest)

    return parser


def main(argv=None):
    """Entry point; returns the process exit code."""
    if argv is None:
        argv = sys.argv[1:]
    argv = list(argv)
    try:
        if argv[:1] == ["--from-manifest"]:
            if len(argv) != 2:
                raise InvalidParameterError(
                    "--from-manifest takes exactly one path and no other arguments"
                )
            manifest = serialize.load_manifest(argv[1])
            stored = manifest.get("argv")
            if (not isinstance(stored, list)
                    or not all(isinstance(t, str) for t in stored)):
                raise SchemaError("/argv: manifest must store a list of strings")
            argv = stored
        parser = _build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    except SchemaError as exc:
        print(f"ctrlgrad: {exc}", file=sys.stderr)
        return 3
    except ContractViolationError as exc:
        print(f"ctrlgrad: {exc}", file=sys.stderr)
        return 2
    except (CtrlgradError, ValueError) as exc:
        print(f"ctrlgrad: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ctrlgrad: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
