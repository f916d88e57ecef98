"""Benchmark problem corpus and the diabetes logistic-regression case study.

Six classic test functions with analytic gradients and catalog ground
truths, plus a binary cross-entropy objective over a 768-instance diagnostic
dataset.  Two of the catalog minima (price, cosine-mixture) disagree with
the formulas as printed in the usual collections; for those the registry
carries both the published number and the brute-force-derived minimum of the
formula actually implemented, and targets use the derived value.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Optional

import numpy as np

from . import kernels
from .core import Array, BoxDomain, CountedObjective

TARGET_FROM_CATALOG = "table1"
TARGET_DERIVED = "derived"

#: problem tags understood by the harness, logistic case study included
PROBLEM_TAGS = (
    "price",
    "branin",
    "cosine-mixture",
    "trid",
    "hartmann6",
    "ackley-2",
    "ackley-4",
    "pima-logistic",
)

_BRANIN_FMIN = 5.0 / (4.0 * math.pi)
_HARTMANN6_FMIN = -3.322368011391339
_HARTMANN6_ARGMIN = (
    0.20168952,
    0.15001069,
    0.47687398,
    0.27533243,
    0.31165162,
    0.65730054,
)


@dataclass(frozen=True)
class ProblemSpec:
    """A benchmark objective with domain, gradient, and ground truth."""

    name: str
    dimension: int
    domain: BoxDomain
    value: Callable[[Array], float]
    gradient: Callable[[Array], Array]
    fmin: Optional[float] = None            # target truth used by the harness
    fmin_source: str = TARGET_FROM_CATALOG  # "table1" or "derived"
    published_fmin: Optional[float] = None  # catalog value when it disagrees
    minimizers: tuple[tuple[float, ...], ...] = ()

    def make_objective(self) -> CountedObjective:
        """Fresh counted wrapper; one per trial, counters start at zero."""
        return CountedObjective(self.dimension, self.value, self.gradient, name=self.name)


def make_test_problem(name: str, dimension: Optional[int] = None) -> ProblemSpec:
    """Build one of the six test functions by name.

    ``ackley`` takes an explicit dimension (2 and 4 are the benchmark
    defaults; any positive dimension works).  Unknown names raise ValueError.
    """
    if name == "price":
        return ProblemSpec(
            name="price",
            dimension=2,
            domain=BoxDomain(np.full(2, -10.0), np.full(2, 10.0)),
            value=kernels.price_value,
            gradient=kernels.price_gradient,
            fmin=0.9,
            fmin_source=TARGET_DERIVED,
            published_fmin=-3.0,
            minimizers=((0.0, 0.0),),
        )
    if name == "branin":
        return ProblemSpec(
            name="branin",
            dimension=2,
            domain=BoxDomain(np.array([-5.0, 0.0]), np.array([10.0, 15.0])),
            value=kernels.branin_value,
            gradient=kernels.branin_gradient,
            fmin=_BRANIN_FMIN,
            minimizers=(
                (-math.pi, 12.275),
                (math.pi, 2.275),
                (3.0 * math.pi, 2.475),
            ),
        )
    if name == "cosine-mixture":
        return ProblemSpec(
            name="cosine-mixture",
            dimension=4,
            domain=BoxDomain(np.full(4, -1.0), np.full(4, 1.0)),
            value=kernels.cosine_mixture_value,
            gradient=kernels.cosine_mixture_gradient,
            fmin=-3.6,
            fmin_source=TARGET_DERIVED,
            published_fmin=-0.252,
            # boundary minimum, one corner of the 16 equivalent ones
            minimizers=((1.0, 1.0, 1.0, 1.0),),
        )
    if name == "trid":
        return ProblemSpec(
            name="trid",
            dimension=6,
            domain=BoxDomain(np.full(6, -20.0), np.full(6, 20.0)),
            value=kernels.trid_value,
            gradient=kernels.trid_gradient,
            fmin=-50.0,
            minimizers=((6.0, 10.0, 12.0, 12.0, 10.0, 6.0),),
        )
    if name == "hartmann6":
        return ProblemSpec(
            name="hartmann6",
            dimension=6,
            domain=BoxDomain(np.zeros(6), np.ones(6)),
            value=kernels.hartmann6_value,
            gradient=kernels.hartmann6_gradient,
            fmin=_HARTMANN6_FMIN,
            minimizers=(_HARTMANN6_ARGMIN,),
        )
    if name == "ackley":
        dim = 2 if dimension is None else int(dimension)
        if dim < 1:
            raise ValueError("ackley dimension must be positive")
        bound = 32.768
        return ProblemSpec(
            name=f"ackley-{dim}",
            dimension=dim,
            domain=BoxDomain(np.full(dim, -bound), np.full(dim, bound)),
            value=kernels.ackley_value,
            gradient=kernels.ackley_gradient,
            fmin=0.0,
            minimizers=(tuple(0.0 for _ in range(dim)),),
        )
    raise ValueError(f"unknown test problem {name!r}")


def resolve_test_problem(tag: str) -> ProblemSpec:
    """Resolve a harness tag such as ``ackley-4`` to a ProblemSpec."""
    if tag.startswith("ackley-"):
        return make_test_problem("ackley", int(tag.split("-", 1)[1]))
    return make_test_problem(tag)


# ---------------------------------------------------------------------------
# Logistic regression
# ---------------------------------------------------------------------------


class IngestionError(ValueError):
    """A data file failed to parse; the message names the offending row."""


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix with binary labels."""

    features: Array
    labels: Array

    def __post_init__(self):
        features = np.atleast_2d(np.asarray(self.features, dtype=float))
        labels = np.atleast_1d(np.asarray(self.labels, dtype=float))
        if features.shape[0] != labels.shape[0]:
            raise ValueError("feature rows and labels must match")
        if not np.isfinite(features).all():
            raise ValueError("features contain non-finite entries")
        if not np.all((labels == 0.0) | (labels == 1.0)):
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n_rows(self) -> int:
        return self.labels.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def logistic_loss(w: Array, data: LabeledDataset) -> float:
    """Summed cross-entropy of the logistic model with intercept w[0]."""
    w = np.ascontiguousarray(w, dtype=float)
    if w.shape != (data.n_features + 1,):
        raise ValueError(
            f"weight vector must have {data.n_features + 1} entries, got {w.shape}"
        )
    return float(kernels.logistic_loss(w, data.features, data.labels))


def logistic_gradient(w: Array, data: LabeledDataset) -> Array:
    w = np.ascontiguousarray(w, dtype=float)
    if w.shape != (data.n_features + 1,):
        raise ValueError(
            f"weight vector must have {data.n_features + 1} entries, got {w.shape}"
        )
    return kernels.logistic_gradient(w, data.features, data.labels)


def accuracy(w: Array, test: LabeledDataset) -> float:
    """Fraction of test rows classified correctly; probability 0.5 predicts 1."""
    if test.n_rows == 0:
        raise ValueError("test set is empty")
    w = np.asarray(w, dtype=float)
    z = test.features @ w[1:] + w[0]
    predicted = (z >= 0.0).astype(float)
    return float(np.mean(predicted == test.labels))


def bundled_pima_path() -> str:
    """Path of the synthetic stand-in dataset shipped with the package."""
    return str(resources.files("bowls").joinpath("data/pima_synthetic.csv"))


def load_pima(path: str) -> LabeledDataset:
    """Ingest a 9-column diabetes CSV: 8 numeric features then a 0/1 label.

    An optional single header row is detected and skipped, a UTF-8 byte
    order mark is tolerated, and features are standardized column-wise to
    zero mean and unit variance (constant columns are left at zero).
    Malformed content raises IngestionError naming the file row.
    """
    rows: list[list[float]] = []
    with open(path, newline="", encoding="utf-8-sig") as handle:
        for line_no, cells in enumerate(csv.reader(handle), start=1):
            if not cells or all(not c.strip() for c in cells):
                continue
            if len(cells) != 9:
                raise IngestionError(
                    f"row {line_no}: expected 9 columns, got {len(cells)}"
                )
            try:
                values = [float(c) for c in cells]
            except ValueError:
                if line_no == 1:
                    continue  # header row
                raise IngestionError(f"row {line_no}: non-numeric cell") from None
            if values[8] not in (0.0, 1.0):
                raise IngestionError(
                    f"row {line_no}: label must be 0 or 1, got {values[8]!r}"
                )
            rows.append(values)
    if not rows:
        raise IngestionError("no data rows found")
    table = np.asarray(rows)
    features = table[:, :8]
    labels = table[:, 8]
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    scale = np.where(std > 0, std, 1.0)
    features = (features - mean) / scale
    return LabeledDataset(features, labels)


def split_train_test(
    data: LabeledDataset, rng: np.random.Generator
) -> tuple[LabeledDataset, LabeledDataset]:
    """Disjoint, exhaustive 90/10 split (691/77 on the 768-row dataset)."""
    n = data.n_rows
    if n < 2:
        raise ValueError("need at least two rows to split")
    n_test = min(max(int(round(n / 10.0)), 1), n - 1)
    order = rng.permutation(n)
    test_idx = order[:n_test]
    train_idx = order[n_test:]
    return (
        LabeledDataset(data.features[train_idx], data.labels[train_idx]),
        LabeledDataset(data.features[test_idx], data.labels[test_idx]),
    )


_WEIGHT_BOUND = 10.0


@dataclass(frozen=True)
class LogisticProblem:
    """Cross-entropy minimization over a box of model weights."""

    train: LabeledDataset
    test: LabeledDataset
    domain: BoxDomain

    def __post_init__(self):
        if self.train.n_features != self.test.n_features:
            raise ValueError("train and test feature counts differ")
        if self.domain.dimension != self.train.n_features + 1:
            raise ValueError("weight domain dimension must be feature count + 1")

    @classmethod
    def from_dataset(
        cls, data: LabeledDataset, rng: np.random.Generator
    ) -> "LogisticProblem":
        train, test = split_train_test(data, rng)
        dim = data.n_features + 1
        domain = BoxDomain(np.full(dim, -_WEIGHT_BOUND), np.full(dim, _WEIGHT_BOUND))
        return cls(train=train, test=test, domain=domain)

    def make_objective(self) -> CountedObjective:
        train = self.train
        return CountedObjective(
            dimension=train.n_features + 1,
            value_fn=lambda w: kernels.logistic_loss(w, train.features, train.labels),
            gradient_fn=lambda w: kernels.logistic_gradient(
                w, train.features, train.labels
            ),
            name="pima-logistic",
        )

    def test_accuracy(self, w: Array) -> float:
        return accuracy(w, self.test)
