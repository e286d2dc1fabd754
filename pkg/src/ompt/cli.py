"""Command-line front end.

Subcommands: metrics, thresholds, recover, oracle, benchmark, converge.
Output is JSON on stdout by default; CSV via --format csv or a .csv
--out path (benchmark).  Exit codes: 0 success, 1 domain errors
(infeasible inputs, enumeration budgets, malformed files), 2 usage.
"""

import argparse
import json
import sys

import numpy as np

from . import experiments, metrics, oracle, solvers, thresholds
from .errors import OmptError
from .linalg import load_matrix_text, normalize_columns


def _load_dictionary(path):
    return normalize_columns(load_matrix_text(path))


def _load_vector(path):
    a = load_matrix_text(path)
    if 1 not in a.shape and a.ndim == 2:
        raise OmptError(f"{path}: expected a vector (one row or one column)")
    return a.reshape(-1)


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _cmd_metrics(args) -> str:
    dictionary = _load_dictionary(args.matrix)
    report = metrics.coherence_report(
        dictionary, args.kmax, compute_ric=args.ric, compute_omega=args.omega
    )
    return report.to_json()


def _cmd_thresholds(args) -> str:
    if args.matrix is not None:
        if args.k is None:
            raise OmptError("--matrix mode needs --k")
        dictionary = _load_dictionary(args.matrix)
        report = metrics.coherence_report(dictionary, args.k + 1, compute_ric=True)
        nu_k, delta_k = report.nu(args.k), report.delta(args.k)
        out = {"theorem1": json.loads(thresholds.noiseless_interval(nu_k, delta_k, args.k).to_json())}
        if args.k >= 2:
            for name, interval in thresholds.corollary_intervals(report, args.k).items():
                out[name] = json.loads(interval.to_json())
        if args.epsilon is not None:
            if args.amin is None:
                raise OmptError("noisy intervals need --amin")
            noisy = thresholds.noisy_interval(nu_k, delta_k, args.k, args.amin, args.epsilon)
            out["noisy"] = json.loads(noisy.to_json())
        return json.dumps(out)
    if args.nu is None or args.delta is None or args.k is None:
        raise OmptError("direct mode needs --nu, --delta and --k (or use --matrix)")
    if args.epsilon is not None:
        if args.amin is None:
            raise OmptError("noisy intervals need --amin")
        interval = thresholds.noisy_interval(
            args.nu, args.delta, args.k, args.amin, args.epsilon
        )
    else:
        interval = thresholds.noiseless_interval(args.nu, args.delta, args.k)
    return interval.to_json()


def _cmd_recover(args) -> str:
    dictionary = _load_dictionary(args.matrix)
    f = _load_vector(args.signal)
    options = solvers.SolverOptions(
        rng_seed=args.seed,
        scan_order=(
            solvers.ScanOrder.FIXED_ASCENDING
            if args.scan == "fixed"
            else solvers.ScanOrder.RANDOM_PERMUTATION_PER_ITERATION
        ),
    )
    if args.t is not None:
        result = solvers.ompt(dictionary, f, args.t, options)
    elif args.k is not None:
        result = solvers.omp(dictionary, f, args.k)
    else:
        raise OmptError("recover needs --t (OMPT) or --k (OMP)")
    return result.to_json()


def _cmd_oracle(args) -> str:
    dictionary = _load_dictionary(args.matrix)
    f = _load_vector(args.signal)
    if args.k is None:
        raise OmptError("oracle needs --k (maximum support size)")
    solution = oracle.sparsest_solution(dictionary, f, args.k, tol=args.tol)
    payload = {
        "sparsity": solution.sparsity,
        "unique": solution.unique,
        "residual_norm": solution.residual_norm,
        "support": None if solution.signal is None else list(solution.signal.support.indices),
        "values": None if solution.signal is None else solution.signal.values.tolist(),
    }
    return json.dumps(payload)


def _cmd_benchmark(args):
    d = args.d if args.d is not None else 2 * args.n
    if d != 2 * args.n:
        raise OmptError("benchmark builds an identity+Fourier dictionary; need d = 2n")
    dictionary = experiments.build_identity_fourier_dictionary(args.n)
    trials = 200 if args.fast else args.trials
    config = experiments.TrialConfig(
        n=args.n,
        d=d,
        sparsity_range=tuple(range(1, args.kmax + 1)),
        trials_per_k=trials,
        threshold_t=args.t,
        noise_level=args.noise,
        rng_seed=args.seed,
    )
    report = experiments.run_trials(config, dictionary, workers=args.workers)
    as_csv = args.format == "csv" or (
        args.format is None and args.out is not None and str(args.out).endswith(".csv")
    )
    if as_csv:
        return experiments.report_to_csv(report)
    return experiments.report_to_json(report)


def _cmd_converge(args) -> str:
    if args.matrix is not None:
        dictionary = _load_dictionary(args.matrix)
    else:
        n = args.n or 32
        d = args.d if args.d is not None else 2 * n
        if d == 2 * n:
            dictionary = experiments.build_identity_fourier_dictionary(n)
        else:
            rng = np.random.default_rng(args.seed)
            dictionary = normalize_columns(rng.standard_normal((n, d)))
    if args.t is None:
        raise OmptError("converge needs --t")
    rng = np.random.default_rng(np.random.SeedSequence([args.seed, 0xC0]))
    n_terms = args.k if args.k is not None else min(8, dictionary.cols)
    instance = experiments.random_convergence_instance(
        dictionary, rng, n_terms=n_terms, epsilon=args.epsilon
    )
    options = solvers.SolverOptions(rng_seed=args.seed)
    return experiments.convergence_check(dictionary, instance, args.t, options).to_json()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ompt",
        description="Sparse recovery by orthogonal matching pursuit with thresholding",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *names):
        if "matrix" in names:
            p.add_argument("--matrix", help="matrix text file ('n d' header + rows)")
        if "signal" in names:
            p.add_argument("--signal", help="signal vector text file")
        if "out" in names:
            p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("metrics", help="coherence / RIC report for a matrix")
    common(p, "matrix", "out")
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--ric", action="store_true", help="include exhaustive RIC")
    p.add_argument("--omega", action="store_true", help="include omega_k")

    p = sub.add_parser("thresholds", help="admissible threshold intervals")
    common(p, "matrix", "out")
    p.add_argument("--nu", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--amin", type=float)

    p = sub.add_parser("recover", help="run one recovery (OMPT via --t, OMP via --k)")
    common(p, "matrix", "signal", "out")
    p.add_argument("--t", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scan", choices=("random", "fixed"), default="random")

    p = sub.add_parser("oracle", help="exact l0 solution by enumeration")
    common(p, "matrix", "signal", "out")
    p.add_argument("--k", type=int, help="maximum support size")
    p.add_argument("--tol", type=float, default=oracle.DEFAULT_TOL)

    p = sub.add_parser("benchmark", help="identity+Fourier phase benchmark")
    common(p, "out")
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--d", type=int)
    p.add_argument("--t", type=float, default=experiments.DEFAULT_BENCHMARK_T)
    p.add_argument("--kmax", type=int, default=40)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--fast", action="store_true", help="200 trials per k")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("json", "csv"))

    p = sub.add_parser("converge", help="residual-decay check on a random instance")
    common(p, "matrix", "out")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--t", type=float)
    p.add_argument("--k", type=int, help="number of nonzero coefficients")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)

    return parser


_HANDLERS = {
    "metrics": _cmd_metrics,
    "thresholds": _cmd_thresholds,
    "recover": _cmd_recover,
    "oracle": _cmd_oracle,
    "benchmark": _cmd_benchmark,
    "converge": _cmd_converge,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        text = _HANDLERS[args.command](args)
        _emit(text, getattr(args, "out", None))
    except OmptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
