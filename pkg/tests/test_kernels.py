"""JIT and pure-numpy kernel backends must agree."""

import numpy as np
import pytest
import scipy.linalg

from bowls import kernels
from bowls.core import seeded_rng

POINT_KERNELS = [
    (kernels.price_value, kernels.price_gradient, 2),
    (kernels.branin_value, kernels.branin_gradient, 2),
    (kernels.cosine_mixture_value, kernels.cosine_mixture_gradient, 4),
    (kernels.trid_value, kernels.trid_gradient, 6),
    (kernels.hartmann6_value, kernels.hartmann6_gradient, 6),
    (kernels.ackley_value, kernels.ackley_gradient, 2),
    (kernels.ackley_value, kernels.ackley_gradient, 4),
]


@pytest.mark.skipif(not kernels.NUMBA_ENABLED, reason="JIT backend disabled")
@pytest.mark.parametrize("value_fn,grad_fn,dim", POINT_KERNELS)
def test_jit_matches_python_backend(value_fn, grad_fn, dim):
    rng = seeded_rng(11)
    value_py = kernels.python_impl(value_fn)
    grad_py = kernels.python_impl(grad_fn)
    for _ in range(25):
        x = rng.uniform(-5.0, 5.0, size=dim)
        assert value_fn(x) == pytest.approx(value_py(x), rel=1e-13, abs=1e-13)
        np.testing.assert_allclose(grad_fn(x), grad_py(x), rtol=1e-12, atol=1e-13)


@pytest.mark.skipif(not kernels.NUMBA_ENABLED, reason="JIT backend disabled")
def test_logistic_backends_agree():
    rng = seeded_rng(3)
    X = rng.normal(size=(40, 5))
    y = (rng.uniform(size=40) < 0.4).astype(float)
    w = rng.normal(size=6)
    loss_py = kernels.python_impl(kernels.logistic_loss)
    grad_py = kernels.python_impl(kernels.logistic_gradient)
    assert kernels.logistic_loss(w, X, y) == pytest.approx(loss_py(w, X, y), rel=1e-12)
    np.testing.assert_allclose(
        kernels.logistic_gradient(w, X, y), grad_py(w, X, y), rtol=1e-12
    )


def _random_chol_problem(rng, batch, n, d):
    X = rng.uniform(size=(n, d))
    diff = X[:, None, :] - X[None, :, :]
    sq = np.ascontiguousarray(diff * diff)
    inv = rng.uniform(0.5, 5.0, size=(batch, d))
    sv = rng.uniform(0.5, 2.0, size=batch)
    noise = np.full(batch, 1e-4)
    resid = rng.normal(size=n)
    return sq, inv, sv, noise, resid


def test_gram_backends_agree_on_lower_triangle():
    rng = seeded_rng(5)
    sq, inv, sv, noise, _ = _random_chol_problem(rng, batch=4, n=17, d=3)
    dense = kernels._se_gram_lower_numpy(sq, inv, sv, noise)
    loops = kernels._se_gram_lower_loops(sq, inv, sv, noise)
    tril = np.tril_indices(17)
    for b in range(4):
        np.testing.assert_allclose(dense[b][tril], loops[b][tril], rtol=1e-13)


def test_chol_stats_against_dense_oracle():
    rng = seeded_rng(6)
    sq, inv, sv, noise, resid = _random_chol_problem(rng, batch=3, n=12, d=2)
    grams = kernels._se_gram_lower_numpy(sq, inv, sv, noise)
    chols = np.linalg.cholesky(grams)
    for impl in (kernels._chol_quad_logdet_numpy, kernels.chol_quad_logdet):
        quad, logdet = impl(chols, resid)
        for b in range(3):
            expect_quad = resid @ np.linalg.solve(grams[b], resid)
            expect_logdet = 0.5 * np.linalg.slogdet(grams[b])[1]
            assert quad[b] == pytest.approx(expect_quad, rel=1e-10)
            assert logdet[b] == pytest.approx(expect_logdet, rel=1e-10)


def test_chol_stats_tolerates_garbage_upper_triangle():
    # the fit path factors lower-only Gram buffers in place
    rng = seeded_rng(9)
    sq, inv, sv, noise, resid = _random_chol_problem(rng, batch=2, n=9, d=2)
    lower_only = kernels._se_gram_lower_loops(sq, inv, sv, noise)
    full = kernels._se_gram_lower_numpy(sq, inv, sv, noise)
    for b in range(2):
        fact = scipy.linalg.cholesky(lower_only[b], lower=True, check_finite=False)
        np.testing.assert_allclose(fact, np.linalg.cholesky(full[b]), rtol=1e-12)
