"""Command-line entry point: ``lincfa {reduce,transform,synth,validate,compare}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, LinCFAError
from .io import atomic_write_text, load_csv, save_csv, write_table
from .lab.checks import (
    ARM_SETS,
    Check,
    closed_form_checks,
    coverage_checks,
    experiment_2d_checks,
    experiment_3d_checks,
    experiment_ddim_checks,
    interval_bruteforce_checks,
    threshold_checks,
)
from .lab.experiments import (
    CURVE_COLUMNS,
    IdentityReducer,
    LinCFAReducer,
    PcaReducer,
    compare_models,
    run_coverage,
    run_experiment_2d,
    run_experiment_3d,
    run_experiment_ddim,
    split_train_test,
)
from .lab.generators import TEST, TRAIN, GeneratorSpec, build_structure, rep_rng
from .reducer import THRESHOLD_KINDS, FittedReducer, ReducerConfig, fit_transform

SCENARIO_ALIASES = {"2d": "bivariate", "3d": "trivariate", "bivariate": "bivariate", "trivariate": "trivariate", "ddim": "ddim"}


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _read_weights(value: str | None) -> tuple[float, ...] | None:
    """Weights come inline (``0.2,0.8``) or from a file of numbers."""
    if value is None:
        return None
    p = Path(value)
    if p.is_file():
        text = p.read_text().replace("\n", ",")
        try:
            return _floats(text)
        except argparse.ArgumentTypeError as exc:
            raise ConfigError(str(exc)) from None
    try:
        return _floats(value)
    except argparse.ArgumentTypeError as exc:
        raise ConfigError(str(exc)) from None


def _reducer_config(args) -> ReducerConfig:
    weights = _read_weights(args.weights)
    if args.mode == "theoretical":
        return ReducerConfig("theoretical", args.threshold, args.delta, weights, args.sigma2, not args.no_standardize)
    return ReducerConfig("empirical", args.threshold, args.delta, standardize=not args.no_standardize)


def _sibling(path: str, suffix: str) -> Path:
    p = Path(path)
    return p.with_name(p.stem + suffix)


# --------------------------------------------------------------------------
# Subcommands. Each returns the list of checks it ran.
# --------------------------------------------------------------------------


def cmd_reduce(args) -> list[Check]:
    cfg = _reducer_config(args)
    d, y = load_csv(args.input, args.target)
    fitted, reduced = fit_transform(d, y, cfg)
    partition_path = Path(args.partition) if args.partition else _sibling(args.output, ".partition.json")
    log_path = Path(args.log) if args.log else _sibling(args.output, ".decisions.log")
    save_csv(args.output, reduced, y, args.target)
    atomic_write_text(partition_path, fitted.to_json() + "\n")
    names = d.column_names
    lines = [f"# mode={cfg.mode} threshold={cfg.threshold_kind} n={d.n} D={d.D} d={fitted.d}"]
    for dec in fitted.decisions:
        i, j = dec.pair
        lines.append(
            f"{names[i]},{names[j]} rho={dec.correlation:.6f} threshold={dec.threshold_text()} "
            f"[{dec.mode}] -> {'aggregate' if dec.aggregate else 'keep'}"
        )
    atomic_write_text(log_path, "\n".join(lines) + "\n")
    print(f"reduced {d.D} features to {fitted.d}: {args.output}")
    return []


def cmd_transform(args) -> list[Check]:
    fitted = FittedReducer.from_json(Path(args.partition).read_text())
    d, y = load_csv(args.input, args.target)
    reduced = fitted.transform(d)
    save_csv(args.output, reduced, y, args.target or "y")
    print(f"transformed {d.n} rows to {reduced.D} features: {args.output}")
    return []


def cmd_synth(args) -> list[Check]:
    scenario = SCENARIO_ALIASES[args.scenario]
    spec = GeneratorSpec(scenario, n=args.n, sigma=args.sigma, weights=args.w, mix=args.mix, D=args.D, seed=args.seed)
    st = build_structure(spec)

    d, y = st.sample(spec.n, rep_rng(spec.seed, 0, 0, TRAIN))
    save_csv(args.output, d, y, "y")
    written = [args.output]
    if args.test_output:
        dt, yt = st.sample(args.test_n or spec.n, rep_rng(spec.seed, 0, 0, TEST))
        save_csv(args.test_output, dt, yt, "y")
        written.append(args.test_output)
    truth = {"scenario": scenario, "weights": [float(v) for v in st.weights], "sigma2": st.sigma2}
    if st.parents:
        truth["parents"] = list(st.parents)
    atomic_write_text(_sibling(args.output, ".truth.json"), json.dumps(truth, indent=2) + "\n")
    print("wrote " + ", ".join(written))
    return []


def cmd_validate(args) -> list[Check]:
    out = Path(args.output_dir)
    scenario = args.scenario
    checks: list[Check] = []
    if scenario == "2d":
        arms = ARM_SETS[args.arms]
        checks += threshold_checks()
        report = run_experiment_2d(arms, args.n, args.reps, args.seed, workers=args.workers)
        report.to_csv(out / f"experiment_2d_{args.arms}.csv")
        checks += experiment_2d_checks(report)
        mc_arms = [a for a in arms if a[0] == 1.0] or arms[:1]
        cf, reports = closed_form_checks(mc_arms, args.n, args.reps, args.seed, args.workers)
        write_table(out / "montecarlo_2d.csv", [r.row() for r in reports], list(reports[0].row()))
        checks += cf
    elif scenario == "3d":
        checks += interval_bruteforce_checks(seed=args.seed)
        report = run_experiment_3d(args.n, args.reps, args.seed, workers=args.workers)
        report.to_csv(out / "experiment_3d.csv")
        checks += experiment_3d_checks(report)
    elif scenario == "ddim":
        report = run_experiment_ddim(args.n_grid, args.D, args.reps, args.seed, workers=args.workers)
        report.to_csv(out / "experiment_ddim.csv")
        report.to_csv(out / "dimension_curve.csv", CURVE_COLUMNS)
        checks += experiment_ddim_checks(report, args.n if args.n in args.n_grid else args.n_grid[-1])
    elif scenario == "coverage":
        summary = run_coverage(args.n, args.reps, args.delta, args.seed, workers=args.workers)
        summary.pop("samples")
        write_table(out / "coverage.csv", [summary], list(summary))
        checks += coverage_checks(summary)
    write_table(out / f"checks_{scenario}.csv", [{"check": c.name, "passed": c.passed, "detail": c.detail} for c in checks], ["check", "passed", "detail"])
    for c in checks:
        print(c.line())
    return checks


def cmd_compare(args) -> list[Check]:
    d, y = load_csv(args.input, args.target)
    train, test = split_train_test(d, y, args.test_fraction, args.seed)
    reducers = [IdentityReducer(), LinCFAReducer(_reducer_config(args)), PcaReducer(args.variance_fraction)]
    table = compare_models(train, test, reducers)
    write_table(args.output, table, ["method", "d", "r2", "mse"])
    for row in table:
        print(f"{row['method']}: d={row['d']} r2={row['r2']:.4f} mse={row['mse']:.4f}")
    return []


# --------------------------------------------------------------------------


def _add_reducer_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=("empirical", "theoretical"), default="empirical")
    p.add_argument("--threshold", choices=THRESHOLD_KINDS, default="asymptotic")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--sigma2", type=float, help="noise variance (theoretical mode)")
    p.add_argument("--weights", help="true weights, inline 'w1,w2,...' or a file (theoretical mode)")
    p.add_argument("--no-standardize", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lincfa", description="Correlated feature aggregation for linear regression.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", help="fit a partition on a CSV and write the reduced data")
    p.add_argument("--input", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--output", required=True, help="reduced CSV")
    p.add_argument("--partition", help="partition JSON (default: <output>.partition.json)")
    p.add_argument("--log", help="decision log (default: <output>.decisions.log)")
    _add_reducer_flags(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("transform", help="apply a saved partition to a CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--target", help="column passed through unchanged")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--scenario", choices=sorted(SCENARIO_ALIASES), default="2d")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--w", type=_floats, help="comma-separated true weights")
    p.add_argument("--mix", type=float, default=0.7)
    p.add_argument("--D", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.add_argument("--test-output")
    p.add_argument("--test-n", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("validate", help="run a lab experiment and check it against closed forms")
    p.add_argument("--scenario", choices=("2d", "3d", "ddim", "coverage"), required=True)
    p.add_argument("--arms", choices=sorted(ARM_SETS), default="both")
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--n-grid", type=_ints, default=(150, 300, 500, 1000, 2000))
    p.add_argument("--D", type=int, default=100)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output-dir", default=".")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compare", help="score identity, LinCFA and PCA on a train/test split")
    p.add_argument("--input", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--test-fraction", type=float, default=1 / 3)
    p.add_argument("--variance-fraction", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    _add_reducer_flags(p)
    p.set_defaults(func=cmd_compare)
    return parser


def _validate_flags(args) -> None:
    if getattr(args, "mode", None) == "theoretical" and (args.weights is None or args.sigma2 is None):
        raise ConfigError("--mode theoretical needs --weights and --sigma2")
    if getattr(args, "mode", None) == "empirical" and (args.weights is not None or args.sigma2 is not None):
        raise ConfigError("--weights/--sigma2 only apply to --mode theoretical")
    if args.command == "compare" and not 0 < args.test_fraction < 1:
        raise ConfigError("--test-fraction must lie in (0, 1)")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _validate_flags(args)
        checks = args.func(args)
    except LinCFAError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        print("STATUS=fail CHECKS=0/0")
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("STATUS=fail CHECKS=0/0")
        return 3
    passed = sum(c.passed for c in checks)
    ok = passed == len(checks)
    print(f"STATUS={'ok' if ok else 'fail'} CHECKS={passed}/{len(checks)}")
    return 0 if ok else 30


if __name__ == "__main__":
    sys.exit(main())
