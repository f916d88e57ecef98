"""Bounded local minimization by nonlinear conjugate gradient descent.

The solver maps a starting point to a single local minimizer of the wrapped
objective: Polak-Ribiere+ directions, a strong Wolfe line search, steps
truncated at the box boundary, and convergence measured on the projected
gradient so boundary minima register as converged.  With a fixed
configuration the whole procedure is a deterministic function of the start,
which is what lets callers treat "value of the local minimum reached from x"
as a well-defined objective in its own right.

Every function and gradient evaluation goes through the CountedObjective, so
the search's cost is exactly what its counters say.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    Array,
    BoxDomain,
    CountedObjective,
    EvalCounter,
    ObjectiveEvaluationError,
)

# relative decrease below which an iteration counts as stalled
_STALL_RTOL = 1e-14
# bound-snap tolerance relative to the box width
_SNAP_RTOL = 1e-12


class LocalSearchError(RuntimeError):
    """A local search hit a non-finite value.  Carries start and bad point."""

    def __init__(self, message: str, x_start: Array, x_bad: Optional[Array] = None):
        super().__init__(message)
        self.x_start = np.asarray(x_start, dtype=float).copy()
        self.x_bad = None if x_bad is None else np.asarray(x_bad, dtype=float).copy()


class LineSearchError(RuntimeError):
    """No acceptable step found along the given direction."""


@dataclass(frozen=True)
class LocalSearchConfig:
    grad_tol: float = 1e-6          # infinity norm of the projected gradient
    max_iterations: int = 200
    sufficient_decrease: float = 1e-4
    curvature: float = 0.4
    restart_every: Optional[int] = None  # None: restart every `dimension` iterations
    max_bracket: int = 20
    max_zoom: int = 25

    def __post_init__(self):
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if not 0.0 < self.sufficient_decrease < self.curvature < 1.0:
            raise ValueError("need 0 < sufficient_decrease < curvature < 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


@dataclass(frozen=True)
class LocalSearchResult:
    x_star: Array
    f_star: float
    iterations: int
    converged: bool
    evals_spent: EvalCounter


def projected_gradient(x: Array, g: Array, domain: BoxDomain) -> Array:
    """Gradient with components zeroed where a bound blocks descent."""
    pg = g.copy()
    pg[(x <= domain.lower) & (g > 0)] = 0.0
    pg[(x >= domain.upper) & (g < 0)] = 0.0
    return pg


def _snap_to_bounds(x: Array, domain: BoxDomain) -> Array:
    tol = _SNAP_RTOL * domain.width
    x = np.clip(x, domain.lower, domain.upper)
    lo = x - domain.lower <= tol
    x[lo] = domain.lower[lo]
    hi = domain.upper - x <= tol
    x[hi] = domain.upper[hi]
    return x


def _feasible_cap(x: Array, d: Array, domain: BoxDomain) -> float:
    """Largest step along d that stays inside the box."""
    cap = np.inf
    up = d > 0
    dn = d < 0
    if np.any(up):
        cap = min(cap, np.min((domain.upper[up] - x[up]) / d[up]))
    if np.any(dn):
        cap = min(cap, np.min((domain.lower[dn] - x[dn]) / d[dn]))
    return float(cap)


def _strong_wolfe(
    obj: CountedObjective,
    x: Array,
    d: Array,
    f0: float,
    dphi0: float,
    alpha_init: float,
    alpha_max: float,
    config: LocalSearchConfig,
):
    """Find a step satisfying the strong Wolfe conditions on (0, alpha_max].

    Returns (alpha, f, g) where g is None when the step came from the
    sufficient-decrease fallback, or None when no acceptable step exists.
    Gradient evaluations are deferred until a probe passes the
    sufficient-decrease test, to keep the combined evaluation count lean.
    """
    c1, c2 = config.sufficient_decrease, config.curvature
    best = None  # (alpha, f) with sufficient decrease, lowest f seen

    def probe(alpha):
        return obj.evaluate(x + alpha * d)

    def slope(alpha):
        g = obj.gradient(x + alpha * d)
        return float(np.dot(g, d)), g

    def zoom(lo, f_lo, dphi_lo, hi, f_hi):
        nonlocal best
        for _ in range(config.max_zoom):
            span = hi - lo
            if abs(span) <= 1e-14 * max(1.0, abs(lo)):
                break
            # quadratic model through (lo, f_lo, dphi_lo) and (hi, f_hi)
            denom = f_hi - f_lo - dphi_lo * span
            if denom > 0:
                alpha = lo - 0.5 * dphi_lo * span * span / denom
            else:
                alpha = lo + 0.5 * span
            lo_, hi_ = (lo, hi) if lo < hi else (hi, lo)
            margin = 0.1 * abs(span)
            alpha = min(max(alpha, lo_ + margin), hi_ - margin)
            f_a = probe(alpha)
            if f_a <= f0 + c1 * alpha * dphi0 and (best is None or f_a < best[1]):
                best = (alpha, f_a)
            if f_a > f0 + c1 * alpha * dphi0 or f_a >= f_lo:
                hi, f_hi = alpha, f_a
                continue
            dphi_a, g_a = slope(alpha)
            if abs(dphi_a) <= -c2 * dphi0:
                return alpha, f_a, g_a
            if dphi_a * span >= 0:
                hi, f_hi = lo, f_lo
            lo, f_lo, dphi_lo = alpha, f_a, dphi_a
        return None

    alpha_prev, f_prev, dphi_prev = 0.0, f0, dphi0
    alpha = min(alpha_init, alpha_max)
    for i in range(config.max_bracket):
        f_a = probe(alpha)
        armijo = f_a <= f0 + c1 * alpha * dphi0
        if armijo and (best is None or f_a < best[1]):
            best = (alpha, f_a)
        if not armijo or (i > 0 and f_a >= f_prev):
            hit = zoom(alpha_prev, f_prev, dphi_prev, alpha, f_a)
            if hit is not None:
                return hit
            break
        dphi_a, g_a = slope(alpha)
        if abs(dphi_a) <= -c2 * dphi0:
            return alpha, f_a, g_a
        if dphi_a >= 0:
            hit = zoom(alpha, f_a, dphi_a, alpha_prev, f_prev)
            if hit is not None:
                return hit
            break
        if alpha >= alpha_max:
            # descending into a box face: accept the truncated step
            return alpha, f_a, g_a
        alpha_prev, f_prev, dphi_prev = alpha, f_a, dphi_a
        alpha = min(2.0 * alpha, alpha_max)

    if best is not None:
        return best[0], best[1], None
    return None


def line_search(
    obj: CountedObjective,
    x: Array,
    direction: Array,
    f_x: float,
    g_x: Array,
    config: LocalSearchConfig,
    domain: BoxDomain,
) -> float:
    """Step length satisfying the strong Wolfe conditions, box-truncated.

    Raises LineSearchError when not even a sufficient-decrease point exists
    within the bracketing budget.
    """
    x = np.asarray(x, dtype=float)
    direction = np.asarray(direction, dtype=float)
    dphi0 = float(np.dot(g_x, direction))
    if dphi0 >= 0:
        raise ValueError("direction is not a descent direction")
    alpha_max = _feasible_cap(x, direction, domain)
    if alpha_max <= 0:
        raise LineSearchError("direction leaves the box immediately")
    hit = _strong_wolfe(obj, x, direction, f_x, dphi0, 1.0, alpha_max, config)
    if hit is None:
        raise LineSearchError("no sufficient-decrease step found")
    return hit[0]


def minimize_local(
    obj: CountedObjective,
    x0: Array,
    domain: BoxDomain,
    config: LocalSearchConfig = LocalSearchConfig(),
) -> LocalSearchResult:
    """Run CG descent from x0 and return the best point encountered.

    The reported minimum is the lowest value over every evaluation the search
    performed (probes included), so the result value never exceeds any
    intermediate observation.  converged is True iff the projected-gradient
    tolerance was met.
    """
    restart_every = config.restart_every or obj.dimension
    before = obj.counter.snapshot()
    x = _snap_to_bounds(np.asarray(x0, dtype=float).copy(), domain)

    try:
        f = obj.evaluate(x)
        g = obj.gradient(x)
    except ObjectiveEvaluationError as err:
        raise LocalSearchError(str(err), x0, err.x) from err

    best_x, best_f = x, f
    pg = projected_gradient(x, g, domain)
    converged = float(np.max(np.abs(pg))) <= config.grad_tol
    d = -pg
    is_steepest = True
    since_restart = 0
    iterations = 0
    f_prev_iter = None
    stalled = 0

    while not converged and iterations < config.max_iterations:
        iterations += 1

        # keep the direction feasible: drop components pushing into a bound
        blocked = ((x <= domain.lower) & (d < 0)) | ((x >= domain.upper) & (d > 0))
        if np.any(blocked):
            d = d.copy()
            d[blocked] = 0.0
        dphi0 = float(np.dot(g, d))
        if dphi0 >= 0 or not np.any(d):
            d, is_steepest, since_restart = -pg, True, 0
            dphi0 = float(np.dot(g, d))

        alpha_max = _feasible_cap(x, d, domain)
        if alpha_max <= 0:
            break
        alpha_init = 1.0
        if f_prev_iter is not None and dphi0 < 0:
            guess = 2.02 * (f - f_prev_iter) / dphi0
            if np.isfinite(guess) and guess > 0:
                alpha_init = min(1.0, guess)
        alpha_init = min(alpha_init, alpha_max)

        try:
            hit = _strong_wolfe(obj, x, d, f, dphi0, alpha_init, alpha_max, config)
        except ObjectiveEvaluationError as err:
            raise LocalSearchError(str(err), x0, err.x) from err

        if hit is None:
            if is_steepest:
                break  # no decrease along steepest descent: give up here
            d, is_steepest, since_restart = -pg, True, 0
            continue

        alpha, f_new, g_new = hit
        x_new = _snap_to_bounds(x + alpha * d, domain)
        try:
            if g_new is None:
                g_new = obj.gradient(x_new)
        except ObjectiveEvaluationError as err:
            raise LocalSearchError(str(err), x0, err.x) from err

        if f_new < best_f:
            best_x, best_f = x_new, f_new
        if f - f_new <= _STALL_RTOL * (1.0 + abs(f)):
            stalled += 1
        else:
            stalled = 0

        pg_new = projected_gradient(x_new, g_new, domain)
        since_restart += 1
        if since_restart >= restart_every:
            d, is_steepest, since_restart = -pg_new, True, 0
        else:
            denom = float(np.dot(pg, pg))
            beta = max(0.0, float(np.dot(pg_new, pg_new - pg)) / denom)
            d = -pg_new + beta * d
            is_steepest = beta == 0.0

        f_prev_iter = f
        x, f, g, pg = x_new, f_new, g_new, pg_new
        converged = float(np.max(np.abs(pg))) <= config.grad_tol
        if stalled >= 2:
            break

    return LocalSearchResult(
        x_star=best_x,
        f_star=best_f,
        iterations=iterations,
        converged=converged,
        evals_spent=obj.counter.since(before),
    )
