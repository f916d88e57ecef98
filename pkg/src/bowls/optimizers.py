"""The optimization drivers and their shared trial protocol.

Four drivers over one cost model (combined function plus gradient
evaluations, read from the objective's own counters):

* ``run_bowls``: Bayesian optimization over the map from a starting point to
  the local-minimum value reached from it.  Each query runs one full local
  search; the surrogate is rebuilt after every observation.
* ``run_bo``: standard Bayesian optimization querying raw objective values.
* ``run_multistart``: repeated local searches from uniform starts.
* ``run_mlsl``: multi level single linkage; samples are screened by value
  and a shrinking critical radius before any local search is spent on them.

A driver stops between atomic units of work (a query or a whole local
search) once the combined-evaluation budget, the iteration cap, or an
optional target value is reached.  Acquisition maximization and model
fitting never touch the counters, so the reported cost is exactly the
objective work done.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .acquisition import AcquisitionSpec, MaximizerConfig, propose_next
from .core import Array, BoxDomain, CountedObjective, sample_uniform
from .gp import EvalDataset, ModelFitError, fit_gp
from .local_search import LocalSearchConfig, LocalSearchError, minimize_local

METHODS = ("bowls", "bo", "multistart", "mlsl")

EVENT_DESIGN = "design"
EVENT_LOCAL_SEARCH = "local-search"
EVENT_BO_QUERY = "bo-query"

TERMINATED_BUDGET = "budget"
TERMINATED_TARGET = "target-reached"
TERMINATED_MAX_ITERATIONS = "max-iterations"


@dataclass(frozen=True)
class TraceEvent:
    combined_evals: int
    best_value: float
    kind: str
    best_point: Optional[Array] = None  # not serialized; used for accuracy curves


@dataclass(frozen=True)
class RunTrace:
    method: str
    problem: str
    seed: int
    events: tuple[TraceEvent, ...]
    final_best_value: float
    final_best_point: Optional[Array]
    terminated: str
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class OptimizerConfig:
    n_initial: Optional[int] = None      # None: max(5, 2 * dimension)
    budget: int = 10_000
    max_iterations: int = 500
    target: Optional[float] = None
    target_tol: Optional[float] = None   # None: 1e-3 * (1 + |target|)
    acquisition: AcquisitionSpec = field(default_factory=AcquisitionSpec)
    local_search: LocalSearchConfig = field(default_factory=LocalSearchConfig)
    maximizer: MaximizerConfig = field(default_factory=MaximizerConfig)
    mlsl_batch: Optional[int] = None     # None: 10 * dimension
    mlsl_sigma: float = 2.0

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError("budget must be nonnegative")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.n_initial is not None and self.n_initial < 2:
            raise ValueError("n_initial must be at least 2")

    def design_size(self, dimension: int) -> int:
        return self.n_initial if self.n_initial is not None else max(5, 2 * dimension)

    def resolved_target_tol(self) -> float:
        if self.target_tol is not None:
            return self.target_tol
        if self.target is None:
            return 0.0
        return 1e-3 * (1.0 + abs(self.target))


def local_minimum_from(
    obj: CountedObjective,
    x_start: Array,
    domain: BoxDomain,
    ls_config: LocalSearchConfig = LocalSearchConfig(),
) -> tuple[float, Array]:
    """Value and location of the local minimum the solver reaches from x_start.

    This is the objective the BOwLS surrogate models: piecewise constant in
    the start, never above the value at the start, and sharing the global
    minima of the underlying objective.  All cost lands on obj's counters.
    """
    result = minimize_local(obj, x_start, domain, ls_config)
    return result.f_star, result.x_star


class _Tracker:
    """Best-so-far bookkeeping and termination checks shared by all drivers."""

    def __init__(self, method: str, obj: CountedObjective, config: OptimizerConfig, seed: int):
        self.method = method
        self.obj = obj
        self.config = config
        self.seed = seed
        self.events: list[TraceEvent] = []
        self.notes: list[str] = []
        self.best = math.inf
        self.best_x: Optional[Array] = None
        self.tol = config.resolved_target_tol()

    def observe(self, value: float, point: Array, kind: str) -> None:
        if value < self.best:
            self.best = value
            self.best_x = np.asarray(point, dtype=float).copy()
        self.events.append(
            TraceEvent(self.obj.counter.combined, self.best, kind, self.best_x)
        )

    def budget_or_target(self) -> Optional[str]:
        if self.obj.counter.combined >= self.config.budget:
            return TERMINATED_BUDGET
        if self.config.target is not None and self.best <= self.config.target + self.tol:
            return TERMINATED_TARGET
        return None

    def stop_reason(self, iterations: int) -> Optional[str]:
        reason = self.budget_or_target()
        if reason is not None:
            return reason
        if iterations >= self.config.max_iterations:
            return TERMINATED_MAX_ITERATIONS
        return None

    def finish(self, problem: str, terminated: str) -> RunTrace:
        return RunTrace(
            method=self.method,
            problem=problem,
            seed=self.seed,
            events=tuple(self.events),
            final_best_value=self.best,
            final_best_point=self.best_x,
            terminated=terminated,
            notes=tuple(self.notes),
        )


def _problem_name(obj: CountedObjective) -> str:
    return obj.name or "objective"


def run_bowls(
    obj: CountedObjective,
    domain: BoxDomain,
    config: OptimizerConfig,
    rng: np.random.Generator,
    seed: int = 0,
) -> RunTrace:
    """Multistart driven by Bayesian optimization over local-search outcomes.

    Phase one maps uniform starts through full local searches to seed the
    dataset of (start, local minimum value) pairs.  Phase two fits the
    surrogate, maximizes the acquisition to pick the next start, runs the
    local search there, and augments the dataset, until a stopping rule
    fires.  Surrogate failures fall back to a uniform start for that round.
    """
    tracker = _Tracker("bowls", obj, config, seed)
    ls = config.local_search
    X: list[Array] = []
    y: list[float] = []
    terminated = tracker.stop_reason(0)

    if terminated is None:
        starts = sample_uniform(domain, config.design_size(domain.dimension), rng)
        for i, x0 in enumerate(starts):
            terminated = tracker.stop_reason(0)
            if terminated is not None:
                break
            try:
                value, x_star = local_minimum_from(obj, x0, domain, ls)
            except LocalSearchError as err:
                tracker.notes.append(f"design start {i} failed: {err}")
                continue
            X.append(np.asarray(x0, dtype=float))
            y.append(value)
            tracker.observe(value, x_star, EVENT_DESIGN)

    iterations = 0
    while terminated is None:
        terminated = tracker.stop_reason(iterations)
        if terminated is not None:
            break
        iterations += 1
        x_next = None
        if len(y) >= 2:
            try:
                model = fit_gp(EvalDataset(np.vstack(X), np.asarray(y)), domain)
            except ModelFitError as err:
                tracker.notes.append(f"iteration {iterations}: model fit failed: {err}")
            else:
                spec = config.acquisition.with_incumbent(min(y))
                x_next, plateau = propose_next(
                    model, spec, domain, config.maximizer, rng
                )
                if plateau:
                    tracker.notes.append(
                        f"iteration {iterations}: acquisition plateau, uniform fallback"
                    )
        if x_next is None:
            x_next = sample_uniform(domain, 1, rng)[0]
        try:
            value, x_star = local_minimum_from(obj, x_next, domain, ls)
        except LocalSearchError as err:
            tracker.notes.append(f"iteration {iterations}: local search failed: {err}")
            continue
        X.append(np.asarray(x_next, dtype=float))
        y.append(value)
        tracker.observe(value, x_star, EVENT_BO_QUERY)

    return tracker.finish(_problem_name(obj), terminated)


def run_bo(
    obj: CountedObjective,
    domain: BoxDomain,
    config: OptimizerConfig,
    rng: np.random.Generator,
    seed: int = 0,
) -> RunTrace:
    """Standard Bayesian optimization: each query is one objective evaluation."""
    tracker = _Tracker("bo", obj, config, seed)
    X: list[Array] = []
    y: list[float] = []
    terminated = tracker.stop_reason(0)

    if terminated is None:
        starts = sample_uniform(domain, config.design_size(domain.dimension), rng)
        for x0 in starts:
            terminated = tracker.stop_reason(0)
            if terminated is not None:
                break
            value = obj.evaluate(x0)
            X.append(np.asarray(x0, dtype=float))
            y.append(value)
            tracker.observe(value, x0, EVENT_DESIGN)

    iterations = 0
    while terminated is None:
        terminated = tracker.stop_reason(iterations)
        if terminated is not None:
            break
        iterations += 1
        x_next = None
        if len(y) >= 2:
            try:
                model = fit_gp(EvalDataset(np.vstack(X), np.asarray(y)), domain)
            except ModelFitError as err:
                tracker.notes.append(f"iteration {iterations}: model fit failed: {err}")
            else:
                spec = config.acquisition.with_incumbent(min(y))
                x_next, plateau = propose_next(
                    model, spec, domain, config.maximizer, rng
                )
                if plateau:
                    tracker.notes.append(
                        f"iteration {iterations}: acquisition plateau, uniform fallback"
                    )
        if x_next is None:
            x_next = sample_uniform(domain, 1, rng)[0]
        value = obj.evaluate(x_next)
        X.append(np.asarray(x_next, dtype=float))
        y.append(value)
        tracker.observe(value, x_next, EVENT_BO_QUERY)

    return tracker.finish(_problem_name(obj), terminated)


def run_multistart(
    obj: CountedObjective,
    domain: BoxDomain,
    config: OptimizerConfig,
    rng: np.random.Generator,
    seed: int = 0,
) -> RunTrace:
    """Local searches from independent uniform starts; keep the smallest minimum."""
    tracker = _Tracker("multistart", obj, config, seed)
    iterations = 0
    while True:
        terminated = tracker.stop_reason(iterations)
        if terminated is not None:
            break
        iterations += 1
        x0 = sample_uniform(domain, 1, rng)[0]
        try:
            value, x_star = local_minimum_from(obj, x0, domain, config.local_search)
        except LocalSearchError as err:
            tracker.notes.append(f"start {iterations} failed: {err}")
            continue
        tracker.observe(value, x_star, EVENT_LOCAL_SEARCH)
    return tracker.finish(_problem_name(obj), terminated)


def critical_radius(k: int, dim: int, volume: float, sigma: float) -> float:
    """Shrinking neighborhood radius used by the MLSL screening rule."""
    if k <= 1:
        return 0.0
    factor = math.gamma(1.0 + dim / 2.0) * volume * sigma * math.log(k) / k
    return factor ** (1.0 / dim) / math.sqrt(math.pi)


def mlsl_should_spawn(index: int, points: Array, values: Array, radius: float) -> bool:
    """True when no other known point within ``radius`` beats this one."""
    dists = np.linalg.norm(points - points[index], axis=1)
    nearby = (dists <= radius) & (values < values[index])
    return not bool(np.any(nearby))


def run_mlsl(
    obj: CountedObjective,
    domain: BoxDomain,
    config: OptimizerConfig,
    rng: np.random.Generator,
    seed: int = 0,
) -> RunTrace:
    """Multi level single linkage with uniform batches.

    Each round evaluates a fresh batch of samples (counted), then starts a
    local search from a sample only when no other evaluated sample within the
    round's critical radius has a lower value.  Selected starts are processed
    in order of increasing sample value.
    """
    tracker = _Tracker("mlsl", obj, config, seed)
    batch_size = config.mlsl_batch or 10 * domain.dimension
    known_x: list[Array] = []
    known_f: list[float] = []
    rounds = 0
    terminated = None

    while True:
        terminated = tracker.stop_reason(rounds)
        if terminated is not None:
            break
        rounds += 1
        radius = critical_radius(rounds, domain.dimension, domain.volume, config.mlsl_sigma)

        batch = sample_uniform(domain, batch_size, rng)
        fresh: list[int] = []
        for point in batch:
            if obj.counter.combined >= config.budget:
                break
            known_x.append(np.asarray(point, dtype=float))
            known_f.append(obj.evaluate(point))
            fresh.append(len(known_f) - 1)

        if known_x:
            all_x = np.vstack(known_x)
            all_f = np.asarray(known_f)
            for i in sorted(fresh, key=lambda j: known_f[j]):
                if tracker.budget_or_target() is not None:
                    break
                if not mlsl_should_spawn(i, all_x, all_f, radius):
                    continue
                try:
                    value, x_star = local_minimum_from(
                        obj, all_x[i], domain, config.local_search
                    )
                except LocalSearchError as err:
                    tracker.notes.append(f"round {rounds} start failed: {err}")
                    continue
                tracker.observe(value, x_star, EVENT_LOCAL_SEARCH)

    return tracker.finish(_problem_name(obj), terminated)


DRIVERS = {
    "bowls": run_bowls,
    "bo": run_bo,
    "multistart": run_multistart,
    "mlsl": run_mlsl,
}


def run_method(
    method: str,
    obj: CountedObjective,
    domain: BoxDomain,
    config: OptimizerConfig,
    rng: np.random.Generator,
    seed: int = 0,
) -> RunTrace:
    try:
        driver = DRIVERS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}") from None
    return driver(obj, domain, config, rng, seed)
