"""Command line interface.

Subcommands: ``list`` (problems and methods), ``run`` (one problem/method
pair), ``bench`` (full experiment from a config file), ``accuracy-curve``
(test accuracy of the logistic model after each local search).  Exit codes:
0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from datetime import datetime, timezone
from typing import Optional, Sequence

from .acquisition import ACQUISITION_KINDS
from .bench import (
    ExperimentConfig,
    build_problem_context,
    load_config,
    resolve_data_path,
    run_experiment,
)
from .core import seeded_rng
from .optimizers import METHODS, OptimizerConfig, run_bowls
from .problems import PROBLEM_TAGS, resolve_test_problem


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want exit 1
        raise UsageError(message)


def _validate_problem(tag: str) -> str:
    if tag == "pima-logistic":
        return tag
    try:
        resolve_test_problem(tag)
    except (ValueError, IndexError):
        raise UsageError(f"unknown problem {tag!r}; see 'bowls list'") from None
    return tag


def build_parser() -> _Parser:
    parser = _Parser(prog="bowls", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="print available problems and methods")

    run = sub.add_parser("run", help="run one problem with one method")
    run.add_argument("--problem", required=True)
    run.add_argument("--method", required=True, choices=METHODS)
    run.add_argument("--trials", type=int, default=1)
    run.add_argument("--budget", type=int, default=10_000)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", default="results")
    run.add_argument("--data", default=None, help="dataset CSV for pima-logistic")
    run.add_argument("--acquisition", default="expected-improvement", choices=ACQUISITION_KINDS)
    run.add_argument("--n-initial", type=int, default=None)
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument(
        "--no-target",
        action="store_true",
        help="run the full budget instead of stopping at the known optimum",
    )

    bench = sub.add_parser("bench", help="run a full experiment from a config file")
    bench.add_argument("config", help="flat key = value config file")

    curve = sub.add_parser(
        "accuracy-curve",
        help="logistic case study: test accuracy after each local search",
    )
    curve.add_argument("--data", default=None)
    curve.add_argument("--trials", type=int, default=1)
    curve.add_argument("--budget", type=int, default=10_000)
    curve.add_argument("--seed", type=int, default=0)
    curve.add_argument("--out", default="results")

    return parser


def _cmd_list() -> int:
    print("problems:")
    for tag in PROBLEM_TAGS:
        if tag == "pima-logistic":
            print(f"  {tag:16s} 9-d cross-entropy over the diabetes dataset")
            continue
        spec = resolve_test_problem(tag)
        line = f"  {tag:16s} {spec.dimension}-d, minimum {spec.fmin:.6g}"
        if spec.published_fmin is not None:
            line += f" (derived; catalog lists {spec.published_fmin:g})"
        print(line)
    print("methods:")
    for method in METHODS:
        print(f"  {method}")
    print("acquisitions:")
    for kind in ACQUISITION_KINDS:
        print(f"  {kind}")
    return 0


def _cmd_run(args) -> int:
    _validate_problem(args.problem)
    config = ExperimentConfig(
        problems=(args.problem,),
        methods=(args.method,),
        trials=args.trials,
        budget=args.budget,
        base_seed=args.seed,
        n_initial=args.n_initial,
        acquisition=args.acquisition,
        use_target=not args.no_target,
        data_path=args.data,
        output_dir=args.out,
        jobs=args.jobs,
    )
    trace_path, summary_path = run_experiment(config)
    print(f"trace:   {trace_path}")
    print(f"summary: {summary_path}")
    return 0


def _cmd_bench(args) -> int:
    config = load_config(args.config)
    trace_path, summary_path = run_experiment(config)
    print(f"trace:   {trace_path}")
    print(f"summary: {summary_path}")
    return 0


def _cmd_accuracy_curve(args) -> int:
    context = build_problem_context("pima-logistic", args.data, args.seed)
    logistic = context.logistic
    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "accuracy_curve.csv")
    stamp = datetime.now(timezone.utc).isoformat()
    with open(out_path, "w", newline="", encoding="utf-8") as handle:
        handle.write(f"# generated {stamp}\n")
        writer = csv.writer(handle)
        writer.writerow(
            ("trial", "seed", "ls_index", "combined_evals", "best_train_loss", "test_accuracy")
        )
        for trial in range(args.trials):
            seed = args.seed + trial
            obj = context.make_objective()
            trace = run_bowls(
                obj,
                context.domain,
                OptimizerConfig(budget=args.budget),
                seeded_rng(seed),
                seed,
            )
            for i, event in enumerate(trace.events, start=1):
                acc = logistic.test_accuracy(event.best_point)
                writer.writerow([trial, seed, i, event.combined_evals, repr(event.best_value), repr(acc)])
            final_acc = logistic.test_accuracy(trace.final_best_point)
            print(
                f"trial {trial}: {len(trace.events)} local searches, "
                f"final loss {trace.final_best_value:.4f}, accuracy {final_acc:.4f}"
            )
    print(f"curve:   {out_path}")
    print(f"data:    {resolve_data_path(args.data)}")
    return 0


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    try:
        if args.command == "list":
            return _cmd_list()
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "bench":
            return _cmd_bench(args)
        return _cmd_accuracy_curve(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except Exception as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))
