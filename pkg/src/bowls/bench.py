"""Experiment harness: repeated seeded trials, trace/summary/trajectory CSVs.

A trial is one driver run on one problem with seed ``base_seed + trial
index``; the same seed series is reused across methods so per-trial
comparisons are paired.  The trace file holds one row per recorded event and
is the single source of truth: the summary and trajectory tables are
recomputed from it, never from in-memory state, so they always agree with
what was written.

Outputs are deterministic for a fixed configuration up to the timestamp
comment on the first line of each file.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Optional, Sequence

import numpy as np

from .acquisition import ACQUISITION_KINDS, AcquisitionSpec
from .core import BoxDomain, CountedObjective, seeded_rng
from .optimizers import (
    EVENT_BO_QUERY,
    EVENT_DESIGN,
    EVENT_LOCAL_SEARCH,
    METHODS,
    OptimizerConfig,
    RunTrace,
    run_method,
)
from .problems import (
    PROBLEM_TAGS,
    LogisticProblem,
    bundled_pima_path,
    load_pima,
    resolve_test_problem,
)

TRACE_COLUMNS = (
    "problem",
    "method",
    "trial",
    "seed",
    "event_index",
    "event_kind",
    "combined_evals",
    "best_value",
)
SUMMARY_COLUMNS = (
    "problem",
    "method",
    "trials",
    "successes",
    "mean_evals_to_target",
    "std_evals_to_target",
    "mean_final_best",
    "target",
    "target_source",
)
TRAJECTORY_COLUMNS = ("problem", "method", "combined_evals", "mean_best_value")

_EVENT_KINDS = (EVENT_DESIGN, EVENT_LOCAL_SEARCH, EVENT_BO_QUERY)
_FAILED_KIND = "failed"


@dataclass(frozen=True)
class ExperimentConfig:
    problems: tuple[str, ...]
    methods: tuple[str, ...]
    trials: int = 50
    trial_overrides: dict = field(default_factory=dict)  # per-problem trial counts
    budget: int = 10_000
    base_seed: int = 0
    n_initial: Optional[int] = None
    acquisition: str = "expected-improvement"
    use_target: bool = True
    data_path: Optional[str] = None
    output_dir: str = "results"
    jobs: int = 1

    def __post_init__(self):
        if not self.problems:
            raise ValueError("at least one problem is required")
        if not self.methods:
            raise ValueError("at least one method is required")
        for method in self.methods:
            if method not in METHODS:
                raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
        if self.acquisition not in ACQUISITION_KINDS:
            raise ValueError(f"unknown acquisition {self.acquisition!r}")
        if self.trials < 1 or self.budget < 0 or self.jobs < 1:
            raise ValueError("trials and jobs must be positive, budget nonnegative")

    def trials_for(self, problem: str) -> int:
        return int(self.trial_overrides.get(problem, self.trials))


@dataclass(frozen=True)
class SummaryRow:
    problem: str
    method: str
    trials: int
    successes: int
    mean_evals_to_target: Optional[float]
    std_evals_to_target: Optional[float]
    mean_final_best: Optional[float]
    target: Optional[float]
    target_source: str


@dataclass(frozen=True)
class ProblemContext:
    """Everything a driver needs to run one problem."""

    tag: str
    dimension: int
    domain: BoxDomain
    target: Optional[float]
    target_source: str
    make_objective: Callable[[], CountedObjective]
    logistic: Optional[LogisticProblem] = None


def resolve_data_path(explicit: Optional[str] = None) -> str:
    """Dataset file: explicit flag, then PIMA_DATA, then the bundled CSV."""
    return explicit or os.environ.get("PIMA_DATA") or bundled_pima_path()


def build_problem_context(
    tag: str, data_path: Optional[str] = None, split_seed: int = 0
) -> ProblemContext:
    if tag == "pima-logistic":
        data = load_pima(resolve_data_path(data_path))
        logistic = LogisticProblem.from_dataset(data, seeded_rng(split_seed))
        return ProblemContext(
            tag=tag,
            dimension=logistic.domain.dimension,
            domain=logistic.domain,
            target=None,
            target_source="none",
            make_objective=logistic.make_objective,
            logistic=logistic,
        )
    spec = resolve_test_problem(tag)
    return ProblemContext(
        tag=tag,
        dimension=spec.dimension,
        domain=spec.domain,
        target=spec.fmin,
        target_source=spec.fmin_source,
        make_objective=spec.make_objective,
    )


def known_target(tag: str) -> tuple[Optional[float], str]:
    """Target value and source for a tag, without touching any data files."""
    if tag == "pima-logistic":
        return None, "none"
    spec = resolve_test_problem(tag)
    return spec.fmin, spec.fmin_source


def default_target_tol(target: float) -> float:
    return 1e-3 * (1.0 + abs(target))


def run_trial(
    tag: str, method: str, trial_index: int, config: ExperimentConfig
) -> RunTrace:
    """Run a single seeded trial with a fresh objective and counter."""
    context = build_problem_context(tag, config.data_path, config.base_seed)
    seed = config.base_seed + trial_index
    opt_config = OptimizerConfig(
        n_initial=config.n_initial,
        budget=config.budget,
        target=context.target if config.use_target else None,
        acquisition=AcquisitionSpec(kind=config.acquisition),
    )
    obj = context.make_objective()
    return run_method(method, obj, context.domain, opt_config, seeded_rng(seed), seed)


def _trial_rows(tag, method, trial_index, config, trace: Optional[RunTrace]):
    seed = config.base_seed + trial_index
    if trace is None:
        return [[tag, method, trial_index, seed, 0, _FAILED_KIND, 0, ""]]
    if not trace.events:
        return [
            [tag, method, trial_index, seed, 0, trace.terminated, 0, repr(trace.final_best_value)]
        ]
    return [
        [tag, method, trial_index, seed, i, ev.kind, ev.combined_evals, repr(ev.best_value)]
        for i, ev in enumerate(trace.events)
    ]


def _pool_task(args):
    tag, method, trial_index, config = args
    try:
        return run_trial(tag, method, trial_index, config)
    except Exception:  # failed trials are recorded; the experiment continues
        return None


def default_grid(budget: int, points: int = 50) -> list[int]:
    if budget <= 0:
        return [0]
    grid = np.unique(np.linspace(budget / points, budget, points).astype(int))
    return [int(g) for g in grid if g > 0]


def run_experiment(config: ExperimentConfig) -> tuple[str, str]:
    """Run every (problem, method, trial) and write trace + summary CSVs.

    Also emits a trajectory table (mean best value on an evaluation grid).
    Individual trial failures become ``failed`` rows; an unwritable output
    directory raises before any trial runs.  Returns the trace and summary
    paths.
    """
    os.makedirs(config.output_dir, exist_ok=True)
    trace_path = os.path.join(config.output_dir, "trace.csv")
    summary_path = os.path.join(config.output_dir, "summary.csv")
    trajectory_path = os.path.join(config.output_dir, "trajectory.csv")
    # fail on unwritable output or unresolvable problems (bad tag, missing
    # dataset) before spending any budget; individual trial failures later
    # only mark their own rows
    with open(trace_path, "w", encoding="utf-8"):
        pass
    for tag in config.problems:
        build_problem_context(tag, config.data_path, config.base_seed)

    tasks = [
        (tag, method, trial, config)
        for tag in config.problems
        for method in config.methods
        for trial in range(config.trials_for(tag))
    ]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            traces = list(pool.map(_pool_task, tasks, chunksize=1))
    else:
        traces = [_pool_task(task) for task in tasks]

    stamp = datetime.now(timezone.utc).isoformat()
    with open(trace_path, "w", newline="", encoding="utf-8") as handle:
        handle.write(f"# generated {stamp}\n")
        writer = csv.writer(handle)
        writer.writerow(TRACE_COLUMNS)
        for (tag, method, trial, _), trace in zip(tasks, traces):
            writer.writerows(_trial_rows(tag, method, trial, config, trace))

    rows = summarize(trace_path)
    write_summary(summary_path, rows, stamp)

    grid = default_grid(config.budget)
    trajectory = trajectory_table(trace_path, grid)
    with open(trajectory_path, "w", newline="", encoding="utf-8") as handle:
        handle.write(f"# generated {stamp}\n")
        writer = csv.writer(handle)
        writer.writerow(TRAJECTORY_COLUMNS)
        for problem, method, evals, value in trajectory:
            writer.writerow([problem, method, evals, repr(value)])

    return trace_path, summary_path


def write_summary(path: str, rows: Sequence[SummaryRow], stamp: Optional[str] = None):
    stamp = stamp or datetime.now(timezone.utc).isoformat()
    with open(path, "w", newline="", encoding="utf-8") as handle:
        handle.write(f"# generated {stamp}\n")
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.problem,
                    row.method,
                    row.trials,
                    row.successes,
                    "" if row.mean_evals_to_target is None else repr(row.mean_evals_to_target),
                    "" if row.std_evals_to_target is None else repr(row.std_evals_to_target),
                    "" if row.mean_final_best is None else repr(row.mean_final_best),
                    "" if row.target is None else repr(row.target),
                    row.target_source,
                ]
            )


def read_trace(path: str):
    """Parse a trace CSV into per-trial event lists.

    Returns {(problem, method, trial): {"seed": int, "events": [(combined,
    best, kind)...], "failed": bool}} preserving event order.  Malformed rows
    raise ValueError naming the file line.
    """
    trials: dict = {}
    with open(path, newline="", encoding="utf-8") as handle:
        header = None
        for line_no, row in enumerate(csv.reader(handle), start=1):
            if not row or row[0].startswith("#"):
                continue
            if header is None:
                header = row
                if tuple(row) != TRACE_COLUMNS:
                    raise ValueError(f"line {line_no}: unexpected trace header {row!r}")
                continue
            if len(row) != len(TRACE_COLUMNS):
                raise ValueError(f"line {line_no}: expected {len(TRACE_COLUMNS)} fields")
            try:
                problem, method = row[0], row[1]
                trial, seed = int(row[2]), int(row[3])
                kind = row[5]
                combined = int(row[6])
                best = float(row[7]) if row[7] != "" else None
            except ValueError as err:
                raise ValueError(f"line {line_no}: malformed row ({err})") from None
            entry = trials.setdefault(
                (problem, method, trial), {"seed": seed, "events": [], "failed": False}
            )
            if kind == _FAILED_KIND:
                entry["failed"] = True
            elif kind in _EVENT_KINDS:
                entry["events"].append((combined, best, kind))
            # rows for empty traces carry only the termination reason
    return trials


def summarize(trace_path: str) -> list[SummaryRow]:
    """Recompute per-(problem, method) statistics from a trace file.

    Success means some event's best value reached the problem's target within
    the default tolerance; evaluation statistics are over successful trials
    only, with the success count reported alongside.
    """
    trials = read_trace(trace_path)
    groups: dict = {}
    for (problem, method, trial), entry in trials.items():
        groups.setdefault((problem, method), {})[trial] = entry

    rows = []
    for (problem, method), per_trial in sorted(groups.items()):
        target, source = known_target(problem)
        tol = default_target_tol(target) if target is not None else 0.0
        evals_to_target = []
        finals = []
        for trial in sorted(per_trial):
            entry = per_trial[trial]
            if entry["failed"] or not entry["events"]:
                continue
            finals.append(entry["events"][-1][1])
            if target is not None:
                for combined, best, _ in entry["events"]:
                    if best <= target + tol:
                        evals_to_target.append(combined)
                        break
        successes = len(evals_to_target)
        finite_finals = [v for v in finals if v is not None and np.isfinite(v)]
        rows.append(
            SummaryRow(
                problem=problem,
                method=method,
                trials=len(per_trial),
                successes=successes,
                mean_evals_to_target=float(np.mean(evals_to_target)) if successes else None,
                std_evals_to_target=(
                    float(np.std(evals_to_target, ddof=1)) if successes > 1 else None
                ),
                mean_final_best=float(np.mean(finite_finals)) if finite_finals else None,
                target=target,
                target_source=source,
            )
        )
    return rows


def trajectory_table(trace_path: str, grid: Sequence[int]):
    """Mean best-so-far value at each grid point, per (problem, method).

    The per-trial curve is a step function through its events; grid points
    before the first event take the first event's value.  Returns flat rows
    (problem, method, grid evals, mean value).
    """
    grid = list(grid)
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be nondecreasing")
    trials = read_trace(trace_path)
    groups: dict = {}
    for (problem, method, trial), entry in trials.items():
        if entry["failed"] or not entry["events"]:
            continue
        groups.setdefault((problem, method), []).append(entry["events"])

    rows = []
    for (problem, method), event_lists in sorted(groups.items()):
        curves = np.empty((len(event_lists), len(grid)))
        for t, events in enumerate(event_lists):
            value = events[0][1]
            k = 0
            for g, point in enumerate(grid):
                while k < len(events) and events[k][0] <= point:
                    value = events[k][1]
                    k += 1
                curves[t, g] = value
        means = curves.mean(axis=0)
        rows.extend(
            (problem, method, int(point), float(means[g])) for g, point in enumerate(grid)
        )
    return rows


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------


def load_config(path: str) -> ExperimentConfig:
    """Parse a flat ``key = value`` config file.

    Lists are comma separated; ``#`` starts a comment; ``trials.<problem>``
    overrides the trial count for one problem.
    """
    values: dict = {}
    overrides: dict = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected 'key = value'")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key.startswith("trials."):
                overrides[key.split(".", 1)[1]] = int(value)
            else:
                values[key] = value

    def listing(key, default):
        if key not in values:
            return default
        return tuple(item.strip() for item in values[key].split(",") if item.strip())

    def flag(key, default):
        if key not in values:
            return default
        return values[key].lower() in ("1", "true", "yes", "on")

    return ExperimentConfig(
        problems=listing("problems", tuple(PROBLEM_TAGS)),
        methods=listing("methods", METHODS),
        trials=int(values.get("trials", 50)),
        trial_overrides=overrides,
        budget=int(values.get("budget", 10_000)),
        base_seed=int(values.get("base_seed", 0)),
        n_initial=int(values["n_initial"]) if "n_initial" in values else None,
        acquisition=values.get("acquisition", "expected-improvement"),
        use_target=flag("use_target", True),
        data_path=values.get("data") or None,
        output_dir=values.get("output", "results"),
        jobs=int(values.get("jobs", 1)),
    )
