"""Gaussian-process regression over observed (start point, value) pairs.

Squared-exponential kernel with per-dimension (ARD) length scales, constant
prior mean set to the data mean, and a small fixed noise floor that keeps the
Gram matrix factorizable when observations sit on near-identical plateaus.
Hyperparameters are chosen by maximizing the log marginal likelihood with a
multi-start compass search in log space; all starts advance in lockstep so
their likelihood evaluations share one batched Cholesky call, and clearly
losing starts are dropped as the dataset grows to keep refits affordable.

Models are immutable once built and safe to read concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from . import kernels
from .core import Array, BoxDomain, seeded_rng

_LOG_2PI = float(np.log(2.0 * np.pi))
# noise floor: 1e-6 times the variance of y, itself floored at 1e-12
_NOISE_SCALE = 1e-6
_VAR_FLOOR = 1e-12
_JITTER_SCALE = 1e-10
_JITTER_ESCALATIONS = 3
# hyperparameter search box, in decades around the data scales
_LOG_RANGE = 3.0
_N_STARTS = 8


class ModelFitError(RuntimeError):
    """Gram factorization failed even after jitter escalation."""


@dataclass(frozen=True)
class EvalDataset:
    """Observed query points and their values."""

    X: Array
    y: Array

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y must have the same number of rows")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise ValueError("dataset entries must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.y.shape[0]

    def add(self, x: Array, value: float) -> "EvalDataset":
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return EvalDataset(np.vstack([self.X, x]), np.append(self.y, value))


@dataclass(frozen=True)
class KernelConfig:
    """Squared-exponential kernel hyperparameters."""

    signal_variance: float
    length_scales: Array
    noise_variance: float = 0.0
    jitter: Optional[float] = None  # None: 1e-10 * signal_variance

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.length_scales, dtype=float))
        if self.signal_variance <= 0 or np.any(ls <= 0):
            raise ValueError("signal variance and length scales must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise variance must be nonnegative")
        object.__setattr__(self, "length_scales", ls)

    @property
    def base_jitter(self) -> float:
        return self.jitter if self.jitter is not None else _JITTER_SCALE * self.signal_variance


def kernel_matrix(kernel: KernelConfig, A: Array, B: Optional[Array] = None) -> Array:
    """Covariance between the rows of A and the rows of B (or A with itself)."""
    A = np.atleast_2d(np.asarray(A, dtype=float)) / kernel.length_scales
    if B is None:
        diff = A[:, None, :] - A[None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff)
    else:
        B = np.atleast_2d(np.asarray(B, dtype=float)) / kernel.length_scales
        sq = (
            np.sum(A * A, axis=1)[:, None]
            + np.sum(B * B, axis=1)[None, :]
            - 2.0 * A @ B.T
        )
        np.maximum(sq, 0.0, out=sq)
    return kernel.signal_variance * np.exp(-0.5 * sq)


@dataclass(frozen=True)
class GPModel:
    """Fitted model: training data, kernel, and cached Cholesky factor."""

    X: Array
    y: Array
    kernel: KernelConfig
    mean: float
    chol: Array      # lower factor of k(X,X) + nugget*I
    weights: Array   # (k(X,X) + nugget*I)^{-1} (y - mean)
    nugget: float    # noise variance plus the jitter actually applied

    @property
    def n_train(self) -> int:
        return self.y.shape[0]

    def posterior(self, X_query: Array):
        """Posterior mean and variance at each query row."""
        X_query = np.atleast_2d(np.asarray(X_query, dtype=float))
        if X_query.shape[1] != self.X.shape[1]:
            raise ValueError(
                f"query dimension {X_query.shape[1]} != model dimension {self.X.shape[1]}"
            )
        k_star = kernel_matrix(self.kernel, X_query, self.X)
        mean = self.mean + k_star @ self.weights
        v = solve_triangular(self.chol, k_star.T, lower=True, check_finite=False)
        var = self.kernel.signal_variance - np.einsum("ij,ij->j", v, v)
        np.maximum(var, 0.0, out=var)
        return mean, var


def gp_posterior(model: GPModel, x: Array) -> tuple[float, float]:
    """Posterior (mean, variance) at a single point."""
    mean, var = model.posterior(np.atleast_2d(x))
    return float(mean[0]), float(var[0])


def _chol_with_escalation(K: Array, base_jitter: float):
    """Cholesky of K + jitter*I, escalating jitter tenfold on failure."""
    jitter = base_jitter
    for attempt in range(_JITTER_ESCALATIONS + 1):
        try:
            shifted = K if jitter == 0.0 else K + jitter * np.eye(K.shape[0])
            return np.linalg.cholesky(shifted), jitter
        except np.linalg.LinAlgError:
            jitter = base_jitter * 10.0 ** (attempt + 1) if jitter > 0 else base_jitter
    raise ModelFitError(
        f"Gram factorization failed after {_JITTER_ESCALATIONS} jitter escalations"
    )


def _drop_duplicate_rows(X: Array, y: Array):
    """Keep the first occurrence of each identical row."""
    seen = set()
    keep = []
    for i, row in enumerate(map(tuple, X)):
        if row not in seen:
            seen.add(row)
            keep.append(i)
    if len(keep) == X.shape[0]:
        return X, y
    return X[keep], y[keep]


def build_gp(
    data: EvalDataset, kernel: KernelConfig, prior_mean: float
) -> GPModel:
    """Assemble a model from explicit hyperparameters (no fitting)."""
    X, y = _drop_duplicate_rows(data.X, data.y)
    K = kernel_matrix(kernel, X)
    K[np.diag_indices_from(K)] += kernel.noise_variance
    chol, jitter = _chol_with_escalation(K, kernel.base_jitter)
    resid = y - prior_mean
    weights = solve_triangular(
        chol.T,
        solve_triangular(chol, resid, lower=True, check_finite=False),
        lower=False,
        check_finite=False,
    )
    return GPModel(
        X=X,
        y=y,
        kernel=kernel,
        mean=float(prior_mean),
        chol=chol,
        weights=weights,
        nugget=kernel.noise_variance + jitter,
    )


def log_marginal_likelihood(
    data: EvalDataset, kernel: KernelConfig, prior_mean: float
) -> float:
    """Gaussian log evidence of the data under the kernel.

    Computed from K = k(X,X) + noise*I exactly when that factors; jitter is
    escalated in only when the bare factorization fails.
    """
    K = kernel_matrix(kernel, data.X)
    K[np.diag_indices_from(K)] += kernel.noise_variance
    try:
        chol = np.linalg.cholesky(K)
    except np.linalg.LinAlgError:
        chol, _ = _chol_with_escalation(K, kernel.base_jitter)
    resid = data.y - prior_mean
    z = solve_triangular(chol, resid, lower=True, check_finite=False)
    n = len(data)
    return float(
        -0.5 * np.dot(z, z) - np.sum(np.log(np.diag(chol))) - 0.5 * n * _LOG_2PI
    )


# ---------------------------------------------------------------------------
# Hyperparameter fitting
# ---------------------------------------------------------------------------


def _lml_batch(sq_dists: Array, resid: Array, sv: Array, inv_ls_sq: Array, noise: Array) -> Array:
    """Log marginal likelihood for a batch of kernels over one dataset.

    sq_dists has shape (n, n, d) holding per-dimension squared coordinate
    differences; sv, noise are (B,) and inv_ls_sq is (B, d).  Items whose
    Gram matrix cannot be factorized get -inf.  Only lower triangles are
    built and factorized.
    """
    B = sv.shape[0]
    n = resid.shape[0]
    grams = kernels.se_gram_lower(sq_dists, inv_ls_sq, sv, noise)
    out = np.full(B, -np.inf)
    ok = []
    for b in range(B):
        try:
            grams[b] = cholesky(grams[b], lower=True, check_finite=False)
            ok.append(b)
        except np.linalg.LinAlgError:
            grams[b] = np.eye(n)  # placeholder; item stays -inf
    if not ok:
        return out
    ok = np.asarray(ok, dtype=int)
    quad, logdet = kernels.chol_quad_logdet(grams, resid)
    out[ok] = -0.5 * quad[ok] - logdet[ok] - 0.5 * n * _LOG_2PI
    return out


def _latin_hypercube(rng: np.random.Generator, count: int, dims: int) -> Array:
    strata = np.tile(np.arange(count, dtype=float), (dims, 1))
    strata = rng.permuted(strata, axis=1).T
    return (strata + rng.uniform(size=(count, dims))) / count


def _search_plan(n: int):
    """(max_steps, log-step tolerance, prune schedule) for n training points.

    Small datasets get a thorough search; large ones drop losing starts early
    because each likelihood evaluation costs a dense factorization.
    """
    if n <= 40:
        return 80, 0.002, {}
    if n <= 150:
        return 40, 0.01, {8: 3, 16: 1}
    if n <= 200:
        return 32, 0.02, {0: 2, 8: 1}
    return 24, 0.02, {0: 1}


def fit_gp(
    data: EvalDataset,
    domain: BoxDomain,
    rng: Optional[np.random.Generator] = None,
) -> GPModel:
    """Fit hyperparameters by maximum marginal likelihood and build the model.

    Duplicate query points are dropped first (they carry no information and
    break positive definiteness).  If every observed value is identical the
    fit degenerates to a constant model at that value.  The search itself is
    deterministic: the Latin-hypercube start layout comes from a fixed seed
    unless an explicit generator is supplied.
    """
    X, y = _drop_duplicate_rows(data.X, data.y)
    n = y.shape[0]
    if n < 2:
        raise ValueError("need at least two observations to fit")
    if X.shape[1] != domain.dimension:
        raise ValueError("dataset dimension does not match the domain")

    if np.ptp(y) == 0.0:
        value = float(y[0])
        sv = _VAR_FLOOR * max(1.0, value * value)
        kernel = KernelConfig(
            signal_variance=sv,
            length_scales=domain.width.copy(),
            noise_variance=0.0,
        )
        return build_gp(EvalDataset(X, y), kernel, value)

    rng = rng if rng is not None else seeded_rng(0)
    mu = float(np.mean(y))
    resid = y - mu
    var_y = float(np.var(y))
    noise_var = _NOISE_SCALE * max(var_y, _VAR_FLOOR)

    # search space: log10 of (signal variance, length scale per dimension)
    center = np.log10(np.concatenate([[var_y], domain.width]))
    lo = center - _LOG_RANGE
    hi = center + _LOG_RANGE
    dims = 1 + domain.dimension

    diff = X[:, None, :] - X[None, :, :]
    sq_dists = np.ascontiguousarray(diff * diff)  # (n, n, d)

    def batch_scores(thetas: Array) -> Array:
        sv = 10.0 ** thetas[:, 0]
        inv_ls_sq = 10.0 ** (-2.0 * thetas[:, 1:])
        noise = noise_var + _JITTER_SCALE * sv
        return _lml_batch(sq_dists, resid, sv, inv_ls_sq, noise)

    theta = lo + _latin_hypercube(rng, _N_STARTS, dims) * (hi - lo)
    scores = batch_scores(theta)
    steps = np.full(theta.shape[0], 0.5)
    max_steps, tol, prune = _search_plan(n)

    for k in range(max_steps):
        if k in prune and theta.shape[0] > prune[k]:
            keep = np.argsort(scores)[::-1][: prune[k]]
            theta, scores, steps = theta[keep], scores[keep], steps[keep]
        active = steps >= tol
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        S = idx.size
        probes = np.repeat(theta[idx], 2 * dims, axis=0).reshape(S, 2 * dims, dims)
        for j in range(dims):
            probes[:, 2 * j, j] += steps[idx]
            probes[:, 2 * j + 1, j] -= steps[idx]
        np.clip(probes, lo, hi, out=probes)
        vals = batch_scores(probes.reshape(-1, dims)).reshape(S, 2 * dims)
        best = np.argmax(vals, axis=1)
        improved = vals[np.arange(S), best] > scores[idx]
        for s, i in enumerate(idx):
            if improved[s]:
                theta[i] = probes[s, best[s]]
                scores[i] = vals[s, best[s]]
            else:
                steps[i] *= 0.5

    top = int(np.argmax(scores))
    kernel = KernelConfig(
        signal_variance=float(10.0 ** theta[top, 0]),
        length_scales=10.0 ** theta[top, 1:],
        noise_variance=noise_var,
    )
    return build_gp(EvalDataset(X, y), kernel, mu)
