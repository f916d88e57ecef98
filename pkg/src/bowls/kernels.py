"""Hot numeric kernels: benchmark objectives and their analytic gradients.

Every kernel is written once, in numba-compatible numpy style, and compiled
with ``@njit`` when the JIT backend is active.  Set ``BOWLS_NUMBA=0`` in the
environment to run the identical pure-Python/numpy code paths instead (the
fallback is also used automatically when numba is not installed).  The
uncompiled originals stay reachable through :func:`python_impl`, which is what
``benchmarks/kernel_bench.py`` uses to time one backend against the other.

These functions are raw oracles: no evaluation counting, no domain checks.
They are defined on all of R^n and wrapped by ``core.CountedObjective``.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

NUMBA_ENABLED = _HAVE_NUMBA and os.environ.get("BOWLS_NUMBA", "1").lower() not in (
    "0",
    "false",
    "off",
)


def _maybe_jit(fn):
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(fn)
    return fn


def python_impl(fn):
    """Return the uncompiled implementation of a kernel from this module."""
    return getattr(fn, "py_func", fn)


# ---------------------------------------------------------------------------
# Benchmark test functions
# ---------------------------------------------------------------------------


@_maybe_jit
def price_value(x):
    s1 = math.sin(x[0])
    s2 = math.sin(x[1])
    return 1.0 + s1 * s1 + s2 * s2 - 0.1 * math.exp(-x[0] * x[0] - x[1] * x[1])


@_maybe_jit
def price_gradient(x):
    e = math.exp(-x[0] * x[0] - x[1] * x[1])
    g = np.empty(2)
    g[0] = math.sin(2.0 * x[0]) + 0.2 * x[0] * e
    g[1] = math.sin(2.0 * x[1]) + 0.2 * x[1] * e
    return g


_BRANIN_B = 1.275 / math.pi**2
_BRANIN_C = 5.0 / math.pi
_BRANIN_R = 10.0 - 5.0 / (4.0 * math.pi)


@_maybe_jit
def branin_value(x):
    u = -_BRANIN_B * x[0] * x[0] + _BRANIN_C * x[0] + x[1] - 6.0
    return u * u + _BRANIN_R * math.cos(x[0]) + 10.0


@_maybe_jit
def branin_gradient(x):
    u = -_BRANIN_B * x[0] * x[0] + _BRANIN_C * x[0] + x[1] - 6.0
    g = np.empty(2)
    g[0] = 2.0 * u * (-2.0 * _BRANIN_B * x[0] + _BRANIN_C) - _BRANIN_R * math.sin(x[0])
    g[1] = 2.0 * u
    return g


@_maybe_jit
def cosine_mixture_value(x):
    total = 0.0
    for i in range(x.shape[0]):
        total += -0.1 * math.cos(5.0 * math.pi * x[i]) - x[i] * x[i]
    return total


@_maybe_jit
def cosine_mixture_gradient(x):
    g = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        g[i] = 0.5 * math.pi * math.sin(5.0 * math.pi * x[i]) - 2.0 * x[i]
    return g


@_maybe_jit
def trid_value(x):
    n = x.shape[0]
    total = 0.0
    for i in range(n):
        d = x[i] - 1.0
        total += d * d
    for i in range(1, n):
        total -= x[i] * x[i - 1]
    return total


@_maybe_jit
def trid_gradient(x):
    n = x.shape[0]
    g = np.empty(n)
    for i in range(n):
        g[i] = 2.0 * (x[i] - 1.0)
        if i > 0:
            g[i] -= x[i - 1]
        if i < n - 1:
            g[i] -= x[i + 1]
    return g


_HARTMANN6_A = np.array(
    [
        [10.0, 3.0, 17.0, 3.50, 1.70, 8.0],
        [0.05, 10.0, 17.0, 0.10, 8.00, 14.0],
        [3.0, 3.50, 1.70, 10.0, 17.0, 8.0],
        [17.0, 8.0, 0.05, 10.0, 0.10, 14.0],
    ]
)
_HARTMANN6_C = np.array([1.0, 1.2, 3.0, 3.2])
_HARTMANN6_P = np.array(
    [
        [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
        [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
        [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
        [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
    ]
)


@_maybe_jit
def hartmann6_value(x):
    total = 0.0
    for i in range(4):
        arg = 0.0
        for j in range(6):
            d = x[j] - _HARTMANN6_P[i, j]
            arg += _HARTMANN6_A[i, j] * d * d
        total -= _HARTMANN6_C[i] * math.exp(-arg)
    return total


@_maybe_jit
def hartmann6_gradient(x):
    g = np.zeros(6)
    for i in range(4):
        arg = 0.0
        for j in range(6):
            d = x[j] - _HARTMANN6_P[i, j]
            arg += _HARTMANN6_A[i, j] * d * d
        e = _HARTMANN6_C[i] * math.exp(-arg)
        for j in range(6):
            g[j] += e * 2.0 * _HARTMANN6_A[i, j] * (x[j] - _HARTMANN6_P[i, j])
    return g


@_maybe_jit
def ackley_value(x):
    n = x.shape[0]
    sq = 0.0
    cs = 0.0
    for i in range(n):
        sq += x[i] * x[i]
        cs += math.cos(2.0 * math.pi * x[i])
    r = math.sqrt(sq / n)
    return -20.0 * math.exp(-0.2 * r) - math.exp(cs / n) + 20.0 + math.e


@_maybe_jit
def ackley_gradient(x):
    n = x.shape[0]
    sq = 0.0
    cs = 0.0
    for i in range(n):
        sq += x[i] * x[i]
        cs += math.cos(2.0 * math.pi * x[i])
    r = math.sqrt(sq / n)
    g = np.zeros(n)
    if r == 0.0:
        # stationary by symmetry; the radial term is not differentiable here
        return g
    a = 4.0 * math.exp(-0.2 * r) / (n * r)
    b = 2.0 * math.pi * math.exp(cs / n) / n
    for i in range(n):
        g[i] = a * x[i] + b * math.sin(2.0 * math.pi * x[i])
    return g


# ---------------------------------------------------------------------------
# Batched Cholesky statistics (surrogate-fit inner loop)
# ---------------------------------------------------------------------------


def _se_gram_lower_loops(sq_dists, inv_ls_sq, sv, noise):
    # sq_dists is (n, n, d); only the lower triangle of each Gram is filled,
    # which is all a lower Cholesky factorization reads
    B, d = inv_ls_sq.shape
    n = sq_dists.shape[0]
    K = np.empty((B, n, n))
    for b in range(B):
        for i in range(n):
            for j in range(i + 1):
                acc = 0.0
                for k in range(d):
                    acc += inv_ls_sq[b, k] * sq_dists[i, j, k]
                K[b, i, j] = sv[b] * np.exp(-0.5 * acc)
            K[b, i, i] += noise[b]
    return K


def _se_gram_lower_numpy(sq_dists, inv_ls_sq, sv, noise):
    q = np.einsum("bd,ijd->bij", inv_ls_sq, sq_dists)
    q *= -0.5
    np.exp(q, out=q)
    q *= sv[:, None, None]
    idx = np.arange(q.shape[1])
    q[:, idx, idx] += noise[:, None]
    return q


def _chol_quad_logdet_loops(chols, resid):
    B, n, _ = chols.shape
    quad = np.empty(B)
    logdet = np.empty(B)
    for b in range(B):
        acc_logdet = 0.0
        acc_quad = 0.0
        z = np.empty(n)
        for i in range(n):
            s = resid[i]
            for j in range(i):
                s -= chols[b, i, j] * z[j]
            z[i] = s / chols[b, i, i]
            acc_quad += z[i] * z[i]
            acc_logdet += math.log(chols[b, i, i])
        quad[b] = acc_quad
        logdet[b] = acc_logdet
    return quad, logdet


def _chol_quad_logdet_numpy(chols, resid):
    # forward substitution vectorized across the batch
    B, n, _ = chols.shape
    z = np.empty((B, n))
    for i in range(n):
        if i:
            partial = np.einsum("bj,bj->b", chols[:, i, :i], z[:, :i])
        else:
            partial = 0.0
        z[:, i] = (resid[i] - partial) / chols[:, i, i]
    quad = np.einsum("bi,bi->b", z, z)
    logdet = np.sum(np.log(np.einsum("bii->bi", chols)), axis=1)
    return quad, logdet


if NUMBA_ENABLED:
    se_gram_lower = numba.njit(cache=True)(_se_gram_lower_loops)
    chol_quad_logdet = numba.njit(cache=True)(_chol_quad_logdet_loops)
else:
    se_gram_lower = _se_gram_lower_numpy
    chol_quad_logdet = _chol_quad_logdet_numpy


# ---------------------------------------------------------------------------
# Logistic regression objective
# ---------------------------------------------------------------------------


@_maybe_jit
def logistic_loss(w, features, labels):
    """Summed cross-entropy of a logistic model; w[0] is the intercept.

    Uses the log-sum-exp form softplus(z) - y*z, which is finite for any
    finite weights.
    """
    n, m = features.shape
    total = 0.0
    for i in range(n):
        z = w[0]
        for j in range(m):
            z += features[i, j] * w[j + 1]
        # group the large terms first so a saturated margin keeps its
        # exponentially small remainder
        if z > 0.0:
            total += (z - labels[i] * z) + math.log1p(math.exp(-z))
        else:
            total += (-labels[i] * z) + math.log1p(math.exp(z))
    return total


@_maybe_jit
def logistic_gradient(w, features, labels):
    n, m = features.shape
    g = np.zeros(m + 1)
    for i in range(n):
        z = w[0]
        for j in range(m):
            z += features[i, j] * w[j + 1]
        if z >= 0.0:
            h = 1.0 / (1.0 + math.exp(-z))
        else:
            e = math.exp(z)
            h = e / (1.0 + e)
        r = h - labels[i]
        g[0] += r
        for j in range(m):
            g[j + 1] += features[i, j] * r
    return g
