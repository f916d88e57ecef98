"""Acquisition scores over a fitted model and the inner maximizer.

All scores are oriented so that larger is better for a minimization problem.
The inner maximizer scores a uniform candidate sweep, then polishes the best
few candidates with a box-respecting compass search on the acquisition
surface.  None of this touches the objective's evaluation counters; the only
cost the experiment metric sees is what the chosen start later spends in its
local search or query.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np
from scipy.special import ndtr

from .core import Array, BoxDomain, sample_uniform
from .gp import GPModel

EXPECTED_IMPROVEMENT = "expected-improvement"
PROBABILITY_OF_IMPROVEMENT = "probability-of-improvement"
CONFIDENCE_BOUND = "confidence-bound"
ACQUISITION_KINDS = (
    EXPECTED_IMPROVEMENT,
    PROBABILITY_OF_IMPROVEMENT,
    CONFIDENCE_BOUND,
)

_PLATEAU_RTOL = 1e-15
_SQRT_2PI = math.sqrt(2.0 * math.pi)

Scalarish = Union[float, Array]


@dataclass(frozen=True)
class AcquisitionSpec:
    """Which score to maximize and its exploration parameters."""

    kind: str = EXPECTED_IMPROVEMENT
    xi: Optional[float] = None  # improvement margin; None: 1% of the observed value range
    kappa: float = 2.0
    incumbent: float = math.nan

    def __post_init__(self):
        if self.kind not in ACQUISITION_KINDS:
            raise ValueError(f"unknown acquisition kind {self.kind!r}")
        if self.xi is not None and self.xi < 0:
            raise ValueError("xi must be nonnegative")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")

    def with_incumbent(self, value: float) -> "AcquisitionSpec":
        return replace(self, incumbent=float(value))


@dataclass(frozen=True)
class MaximizerConfig:
    candidate_count: Optional[int] = None  # None: min(2048, 256 * dimension)
    refine_starts: int = 5
    refine_steps: int = 50

    def __post_init__(self):
        if self.candidate_count is not None and self.candidate_count < 1:
            raise ValueError("candidate_count must be positive")
        if self.refine_starts < 1 or self.refine_steps < 1:
            raise ValueError("refinement counts must be positive")


def _norm_pdf(z: Array) -> Array:
    return np.exp(-0.5 * z * z) / _SQRT_2PI


def expected_improvement(
    mean: Scalarish, sd: Scalarish, incumbent: Scalarish
) -> Scalarish:
    """E[max(incumbent - Y, 0)] for Y ~ N(mean, sd^2); zero-sd limit included."""
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    gap = np.asarray(incumbent, dtype=float) - mean
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sd > 0, gap / np.where(sd > 0, sd, 1.0), 0.0)
        ei = np.where(sd > 0, gap * ndtr(z) + sd * _norm_pdf(z), np.maximum(gap, 0.0))
    out = np.maximum(ei, 0.0)
    return float(out) if out.ndim == 0 else out


def probability_of_improvement(
    mean: Scalarish, sd: Scalarish, incumbent: Scalarish, xi: float = 0.0
) -> Scalarish:
    """P(Y < incumbent - xi) for Y ~ N(mean, sd^2)."""
    if xi < 0:
        raise ValueError("xi must be nonnegative")
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    gap = np.asarray(incumbent, dtype=float) - xi - mean
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            sd > 0,
            ndtr(np.where(sd > 0, gap / np.where(sd > 0, sd, 1.0), 0.0)),
            (gap > 0).astype(float),
        )
    return float(out) if out.ndim == 0 else out


def confidence_bound_score(mean: Scalarish, sd: Scalarish, kappa: float) -> Scalarish:
    """Negated lower confidence bound: -(mean - kappa*sd), larger is better."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    out = -(np.asarray(mean, dtype=float) - kappa * np.asarray(sd, dtype=float))
    return float(out) if out.ndim == 0 else out


def score_points(model: GPModel, spec: AcquisitionSpec, X: Array) -> Array:
    """Acquisition value of each row of X under the model."""
    if not math.isfinite(spec.incumbent):
        raise ValueError("acquisition incumbent must be finite")
    mean, var = model.posterior(X)
    sd = np.sqrt(var)
    if spec.kind == EXPECTED_IMPROVEMENT:
        return np.asarray(expected_improvement(mean, sd, spec.incumbent))
    if spec.kind == PROBABILITY_OF_IMPROVEMENT:
        xi = spec.xi if spec.xi is not None else 0.01 * float(np.ptp(model.y))
        return np.asarray(probability_of_improvement(mean, sd, spec.incumbent, xi))
    return np.asarray(confidence_bound_score(mean, sd, spec.kappa))


def propose_next(
    model: GPModel,
    spec: AcquisitionSpec,
    domain: BoxDomain,
    config: MaximizerConfig,
    rng: np.random.Generator,
) -> tuple[Array, bool]:
    """Next query point and whether the plateau fallback fired.

    When every candidate scores (numerically) the same the surface carries no
    preference, so a fresh uniform point is returned instead and flagged; the
    caller logs it.  Otherwise the top candidates are refined by compass
    search and the single best point found anywhere is returned.  Ties go to
    the earliest candidate in draw order.
    """
    dim = domain.dimension
    count = config.candidate_count or min(2048, 256 * dim)
    candidates = sample_uniform(domain, count, rng)
    scores = score_points(model, spec, candidates)

    top = float(np.max(scores))
    if np.ptp(scores) <= _PLATEAU_RTOL * max(1.0, abs(top)):
        return sample_uniform(domain, 1, rng)[0], True

    n_starts = min(config.refine_starts, count)
    order = np.argsort(-scores, kind="stable")[:n_starts]
    points = candidates[order].copy()
    values = scores[order].copy()

    width = domain.width
    steps = np.full(n_starts, 0.05)
    for _ in range(config.refine_steps):
        active = steps >= 1e-4
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        S = idx.size
        probes = np.repeat(points[idx], 2 * dim, axis=0).reshape(S, 2 * dim, dim)
        for j in range(dim):
            probes[:, 2 * j, j] += steps[idx] * width[j]
            probes[:, 2 * j + 1, j] -= steps[idx] * width[j]
        np.clip(probes, domain.lower, domain.upper, out=probes)
        vals = score_points(model, spec, probes.reshape(-1, dim)).reshape(S, 2 * dim)
        best = np.argmax(vals, axis=1)
        improved = vals[np.arange(S), best] > values[idx]
        for s, i in enumerate(idx):
            if improved[s]:
                points[i] = probes[s, best[s]]
                values[i] = vals[s, best[s]]
            else:
                steps[i] *= 0.5

    return points[int(np.argmax(values))], False


def maximize_acquisition(
    model: GPModel,
    spec: AcquisitionSpec,
    domain: BoxDomain,
    config: MaximizerConfig,
    rng: np.random.Generator,
) -> Array:
    """The point maximizing the acquisition (plateau fallback included)."""
    return propose_next(model, spec, domain, config, rng)[0]
