"""Problem abstractions shared by every optimizer.

Box-bounded search domains, objectives with tamper-proof evaluation counters,
and seeded random number streams.  The combined count n_f + n_g is the cost
metric every driver reports, so the counters live inside the objective
wrapper where no optimizer can miscount them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Array = np.ndarray


class ObjectiveEvaluationError(RuntimeError):
    """An oracle returned a non-finite value.  Carries the offending point."""

    def __init__(self, message: str, x: Array):
        super().__init__(message)
        self.x = np.asarray(x, dtype=float).copy()


class GradientUnavailableError(RuntimeError):
    """The objective has no gradient oracle."""


def seeded_rng(seed: int) -> np.random.Generator:
    """Return a generator whose draw sequence is reproducible across platforms."""
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned compact search region with per-dimension bounds."""

    lower: Array
    upper: Array

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ValueError("lower and upper bounds must be 1-d and equally long")
        if lo.size < 1:
            raise ValueError("domain dimension must be at least 1")
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("bounds must be finite")
        if not np.all(lo < hi):
            raise ValueError("every lower bound must be strictly below its upper bound")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dimension(self) -> int:
        return self.lower.size

    @property
    def width(self) -> Array:
        return self.upper - self.lower

    @property
    def volume(self) -> float:
        return float(np.prod(self.width))

    def contains(self, x: Array, atol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(
            x.shape == self.lower.shape
            and np.all(x >= self.lower - atol)
            and np.all(x <= self.upper + atol)
        )

    def clip(self, x: Array) -> Array:
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)


@dataclass
class EvalCounter:
    """Monotone tallies of objective-value and gradient evaluations."""

    n_f: int = 0
    n_g: int = 0

    @property
    def combined(self) -> int:
        return self.n_f + self.n_g

    def snapshot(self) -> "EvalCounter":
        return EvalCounter(self.n_f, self.n_g)

    def since(self, earlier: "EvalCounter") -> "EvalCounter":
        """Counter delta accumulated after ``earlier`` was snapshotted."""
        return EvalCounter(self.n_f - earlier.n_f, self.n_g - earlier.n_g)


def combined_evals(counter: EvalCounter) -> int:
    return counter.combined


class CountedObjective:
    """An objective with value/gradient oracles and attached counters.

    Every :meth:`evaluate` call increments ``counter.n_f`` by exactly one and
    every :meth:`gradient` call increments ``counter.n_g`` by exactly one,
    regardless of dimension.  A single instance is not thread-safe; give each
    concurrent trial its own wrapper.
    """

    def __init__(
        self,
        dimension: int,
        value_fn: Callable[[Array], float],
        gradient_fn: Optional[Callable[[Array], Array]] = None,
        name: str = "",
    ):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self.dimension = int(dimension)
        self.name = name
        self._value_fn = value_fn
        self._gradient_fn = gradient_fn
        self.counter = EvalCounter()

    @property
    def has_gradient(self) -> bool:
        return self._gradient_fn is not None

    def _check_point(self, x: Array) -> Array:
        x = np.ascontiguousarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(
                f"point has shape {x.shape}, objective {self.name!r} expects ({self.dimension},)"
            )
        return x

    def evaluate(self, x: Array) -> float:
        x = self._check_point(x)
        self.counter.n_f += 1
        value = float(self._value_fn(x))
        if not np.isfinite(value):
            raise ObjectiveEvaluationError(
                f"objective {self.name!r} returned {value!r}", x
            )
        return value

    def gradient(self, x: Array) -> Array:
        if self._gradient_fn is None:
            raise GradientUnavailableError(
                f"objective {self.name!r} has no gradient oracle"
            )
        x = self._check_point(x)
        self.counter.n_g += 1
        grad = np.asarray(self._gradient_fn(x), dtype=float)
        if grad.shape != (self.dimension,):
            raise ValueError(
                f"gradient oracle of {self.name!r} returned shape {grad.shape}"
            )
        if not np.all(np.isfinite(grad)):
            raise ObjectiveEvaluationError(
                f"gradient of {self.name!r} is non-finite", x
            )
        return grad


def sample_uniform(
    domain: BoxDomain, count: int, rng: np.random.Generator
) -> Array:
    """Draw ``count`` points i.i.d. uniform over the box, one per row."""
    if count < 1:
        raise ValueError("count must be at least 1")
    return rng.uniform(domain.lower, domain.upper, size=(count, domain.dimension))
