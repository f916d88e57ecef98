"""Domain, counter, and counted-objective contracts."""

import numpy as np
import pytest

from bowls.core import (
    BoxDomain,
    CountedObjective,
    EvalCounter,
    GradientUnavailableError,
    ObjectiveEvaluationError,
    combined_evals,
    sample_uniform,
    seeded_rng,
)
from bowls.local_search import minimize_local
from bowls.problems import make_test_problem

from conftest import central_diff_gradient, tapped_objective


class TestBoxDomain:
    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError):
            BoxDomain(np.array([0.0, 1.0]), np.array([1.0, 1.0]))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            BoxDomain(np.array([]), np.array([]))

    def test_membership_and_clip(self):
        dom = BoxDomain(np.array([-1.0, 0.0]), np.array([1.0, 2.0]))
        assert dom.dimension == 2
        assert dom.contains(np.array([0.0, 1.0]))
        assert dom.contains(np.array([-1.0, 2.0]))  # boundary included
        assert not dom.contains(np.array([1.5, 1.0]))
        np.testing.assert_allclose(dom.clip(np.array([5.0, -3.0])), [1.0, 0.0])
        assert dom.volume == pytest.approx(4.0)


class TestEvalCounter:
    def test_combined_zero(self):
        assert combined_evals(EvalCounter()) == 0

    def test_combined_sum(self):
        assert combined_evals(EvalCounter(n_f=3, n_g=4)) == 7

    def test_delta(self):
        counter = EvalCounter(5, 2)
        later = EvalCounter(9, 4)
        delta = later.since(counter)
        assert (delta.n_f, delta.n_g) == (4, 2)


class TestCountedObjective:
    def test_ackley_origin_counts(self):
        spec = make_test_problem("ackley", 2)
        obj = spec.make_objective()
        assert obj.counter.n_f == 0
        assert obj.evaluate(np.zeros(2)) == pytest.approx(0.0, abs=1e-12)
        assert obj.counter.n_f == 1

    def test_price_origin(self):
        obj = make_test_problem("price").make_objective()
        assert obj.evaluate(np.zeros(2)) == pytest.approx(0.9, abs=1e-12)

    def test_trid_catalog_minimum(self):
        spec = make_test_problem("trid")
        obj = spec.make_objective()
        argmin = np.array([6.0, 10.0, 12.0, 12.0, 10.0, 6.0])
        assert obj.evaluate(argmin) == pytest.approx(-50.0, abs=1e-10)
        # stationarity confirms the minimizer (trid is strictly convex)
        assert np.max(np.abs(obj.gradient(argmin))) < 1e-10

    def test_dimension_mismatch(self):
        obj = make_test_problem("branin").make_objective()
        with pytest.raises(ValueError):
            obj.evaluate(np.zeros(3))

    def test_non_finite_value_carries_point(self):
        obj = CountedObjective(1, lambda x: float("nan"), name="bad")
        with pytest.raises(ObjectiveEvaluationError) as err:
            obj.evaluate(np.array([2.0]))
        np.testing.assert_allclose(err.value.x, [2.0])

    def test_missing_gradient_oracle(self):
        obj = CountedObjective(1, lambda x: float(x[0]))
        with pytest.raises(GradientUnavailableError):
            obj.gradient(np.array([0.0]))


class TestGradients:
    def test_quadratic(self):
        obj = CountedObjective(2, lambda x: float(x @ x), lambda x: 2 * x)
        np.testing.assert_allclose(obj.gradient(np.array([1.0, 2.0])), [2.0, 4.0])
        assert obj.counter.n_g == 1

    def test_ackley_origin_stationary(self):
        obj = make_test_problem("ackley", 2).make_objective()
        np.testing.assert_allclose(obj.gradient(np.zeros(2)), [0.0, 0.0])

    def test_branin_matches_finite_differences(self):
        spec = make_test_problem("branin")
        x = np.array([1.0, 1.0])
        numeric = central_diff_gradient(spec.value, x, h=1e-6, scale_steps=False)
        analytic = spec.gradient(x)
        assert np.max(np.abs(analytic - numeric)) / np.max(np.abs(numeric)) < 1e-5


class TestCountingExactness:
    def test_local_search_matches_instrumented_tally(self):
        spec = make_test_problem("branin")
        obj, tap = tapped_objective(spec)
        minimize_local(obj, np.array([2.0, 3.0]), spec.domain)
        assert obj.counter.n_f == tap.n_value
        assert obj.counter.n_g == tap.n_gradient
        assert obj.counter.combined == tap.combined
        assert obj.counter.combined > 0


class TestSampleUniform:
    def test_points_inside_box(self):
        dom = BoxDomain(np.zeros(2), np.ones(2))
        pts = sample_uniform(dom, 5, seeded_rng(0))
        assert pts.shape == (5, 2)
        assert all(dom.contains(p) for p in pts)

    def test_seed_reproducibility(self):
        dom = BoxDomain(np.array([-2.0]), np.array([3.0]))
        a = sample_uniform(dom, 10, seeded_rng(42))
        b = sample_uniform(dom, 10, seeded_rng(42))
        np.testing.assert_array_equal(a, b)

    def test_law_of_large_numbers(self):
        dom = BoxDomain(np.full(3, -1.0), np.full(3, 1.0))
        pts = sample_uniform(dom, 10_000, seeded_rng(7))
        assert np.all(np.abs(pts.mean(axis=0)) < 0.05)

    def test_count_validation(self):
        dom = BoxDomain(np.zeros(1), np.ones(1))
        with pytest.raises(ValueError):
            sample_uniform(dom, 0, seeded_rng(0))
