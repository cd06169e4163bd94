"""Command-line interface.

Exit codes: 0 success, 2 usage or input error, 3 degenerate computation.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

from .errors import DegenerateVarianceError, InputError
from .experiments import (
    ConfigError,
    ExperimentConfig,
    run_power_experiment,
    run_single_test,
    run_size_experiment,
    write_tables,
)
from .limit_dist import ks_quantile
from .simulate import ChangePointModel, InnovationModel, gen_ar1
from .variance import BlockLengthRule, Overlap

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3

MIN_TEST_LENGTH = 10
MAX_SIM_RHO = 0.99


def _probability(text):
    try:
        p = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < p < 1.0:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {text}")
    return p


def _variance_rule(text):
    if text == "unadjusted":
        return None
    if text == "adaptive":
        return BlockLengthRule.adaptive()
    if text.startswith("fixed:"):
        try:
            return BlockLengthRule.fixed(int(text[len("fixed:"):]))
        except (ValueError, InputError):
            pass
    raise argparse.ArgumentTypeError(
        f"expected 'unadjusted', 'fixed:<l>' or 'adaptive', got {text!r}"
    )


def _ar_coefficient(text):
    try:
        rho = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not abs(rho) <= MAX_SIM_RHO:
        raise argparse.ArgumentTypeError(
            f"|rho| must be <= {MAX_SIM_RHO} (burn-in does not reach stationarity beyond), got {text}"
        )
    return rho


def read_series(path):
    """Read one numeric column; a non-numeric first line is taken as header."""
    values = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 1:
                raise InputError(f"{path}:{lineno}: expected one column, got {len(row)}")
            cell = row[0].strip()
            try:
                values.append(float(cell))
            except ValueError:
                if lineno == 1:
                    continue
                raise InputError(f"{path}:{lineno}: not a number: {cell!r}") from None
    return values


def cmd_test(args):
    values = read_series(args.input)
    if len(values) < MIN_TEST_LENGTH:
        raise InputError(f"need at least {MIN_TEST_LENGTH} observations, got {len(values)}")
    res = run_single_test(values, args.statistic, args.variance, Overlap(args.overlap), args.alpha)
    out = {
        "statistic": res.statistic,
        "sigma_hat": res.sigma_hat,
        "normalized": res.normalized,
        "p_value": res.p_value,
        "critical_value": res.critical_value,
        "change_point_estimate": res.change_point_estimate,
        "block_length_used": res.block_length_used,
        "rho_hat": res.rho_hat,
        "decision": res.decision,
    }
    json.dump(out, sys.stdout)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_simulate(args):
    model = ChangePointModel(
        n=args.n,
        rho=args.rho,
        innovation=InnovationModel.parse(args.innovation),
        mu=args.mu,
        tau=args.tau,
    )
    x = gen_ar1(model, args.seed)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        out.write("x\n")
        for v in x:
            out.write(f"{float(v)!r}\n")
    finally:
        if args.output:
            out.close()
    return EXIT_OK


def _load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    return ExperimentConfig.from_dict(data)


def cmd_experiment(args, runner):
    config = _load_config(args.config)
    table = runner(config, workers=args.workers)
    paths = write_tables(table, args.output)
    json.dump({"kind": table.kind, "cells": len(table.cells), "files": [str(p) for p in paths]}, sys.stdout)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_limit_quantile(args):
    print(f"{ks_quantile(args.p):.6f}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cpdetect",
        description="Wilcoxon and CUSUM change-point tests for dependent time series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="test a recorded series for a level shift")
    p.add_argument("input", help="CSV file with one numeric column (header optional)")
    p.add_argument("--statistic", choices=["wilcoxon", "cusum"], default="wilcoxon")
    p.add_argument("--variance", type=_variance_rule, default=BlockLengthRule.adaptive(),
                   metavar="{unadjusted,fixed:<l>,adaptive}")
    p.add_argument("--overlap", choices=["ol", "nol"], default="nol")
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", help="simulate AR(1) data with a level shift")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--rho", type=_ar_coefficient, default=0.0)
    p.add_argument("--innovation", choices=["gauss", "t3"], default="gauss")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--tau", type=int, default=None, help="change index (default n/2)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_simulate)

    for name, runner, what in (
        ("experiment-size", run_size_experiment, "empirical size table"),
        ("experiment-power", run_power_experiment, "empirical power curves"),
    ):
        p = sub.add_parser(name, help=f"Monte Carlo {what} from a JSON config")
        p.add_argument("config", help="JSON document with ExperimentConfig fields")
        p.add_argument("-o", "--output", default=".", help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: CPDETECT_THREADS or 1; 0 = all cores)")
        p.set_defaults(func=lambda a, r=runner: cmd_experiment(a, r))

    p = sub.add_parser("limit-quantile", help="quantile of sup|Brownian bridge|")
    p.add_argument("--p", type=_probability, required=True)
    p.set_defaults(func=cmd_limit_quantile)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegenerateVarianceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
