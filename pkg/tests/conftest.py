"""Shared test helpers: finite differences and instrumented objectives."""

from __future__ import annotations

import numpy as np

from bowls.core import CountedObjective


def central_diff_gradient(fn, x, h=1e-6, scale_steps=True):
    """Central finite-difference gradient; step scaled by coordinate size."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        step = h * (1.0 + abs(x[i])) if scale_steps else h
        up = x.copy()
        dn = x.copy()
        up[i] += step
        dn[i] -= step
        grad[i] = (fn(up) - fn(dn)) / (2.0 * step)
    return grad


def relative_gradient_error(analytic, numeric):
    """Worst component error relative to the gradient's own scale."""
    analytic = np.asarray(analytic, dtype=float)
    numeric = np.asarray(numeric, dtype=float)
    scale = max(1.0, float(np.max(np.abs(numeric))))
    return float(np.max(np.abs(analytic - numeric))) / scale


class OracleTap:
    """Wraps raw oracles to independently tally calls and record values."""

    def __init__(self, value_fn, gradient_fn=None):
        self._value_fn = value_fn
        self._gradient_fn = gradient_fn
        self.n_value = 0
        self.n_gradient = 0
        self.values = []
        self.points = []

    def value(self, x):
        self.n_value += 1
        out = self._value_fn(x)
        self.values.append(float(out))
        self.points.append(np.asarray(x, dtype=float).copy())
        return out

    def gradient(self, x):
        self.n_gradient = self.n_gradient + 1
        return self._gradient_fn(x)

    @property
    def combined(self):
        return self.n_value + self.n_gradient


def tapped_objective(spec) -> tuple[CountedObjective, OracleTap]:
    """Counted objective whose raw oracles are shimmed with an OracleTap."""
    tap = OracleTap(spec.value, spec.gradient)
    obj = CountedObjective(spec.dimension, tap.value, tap.gradient, name=spec.name)
    return obj, tap
