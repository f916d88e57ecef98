"""Acquisition score formulas and the inner maximizer."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ndtr

from bowls.acquisition import (
    AcquisitionSpec,
    MaximizerConfig,
    confidence_bound_score,
    expected_improvement,
    maximize_acquisition,
    probability_of_improvement,
    propose_next,
    score_points,
)
from bowls.core import BoxDomain, sample_uniform, seeded_rng
from bowls.gp import EvalDataset, KernelConfig, build_gp, fit_gp


def ei_quadrature(mean, sd, incumbent):
    """Independent oracle: numerically integrate E[max(incumbent - Y, 0)]."""
    def integrand(y):
        return (incumbent - y) * math.exp(-0.5 * ((y - mean) / sd) ** 2) / (
            sd * math.sqrt(2 * math.pi)
        )
    lo = mean - 12 * sd
    value, _ = quad(integrand, lo, incumbent, limit=200)
    return value


class TestExpectedImprovement:
    def test_zero_sd_no_improvement(self):
        assert expected_improvement(1.0, 0.0, 0.0) == 0.0

    def test_at_incumbent_unit_sd(self):
        # E[max(-Z, 0)] = pdf(0) for standard normal Z
        want = 1.0 / math.sqrt(2 * math.pi)
        assert expected_improvement(0.0, 1.0, 0.0) == pytest.approx(want, abs=1e-12)
        assert expected_improvement(0.0, 1.0, 0.0) == pytest.approx(
            ei_quadrature(0.0, 1.0, 0.0), abs=1e-9
        )

    def test_certain_improvement_limit(self):
        assert expected_improvement(-1.0, 1e-12, 0.0) == pytest.approx(1.0, abs=1e-9)
        assert expected_improvement(-1.0, 0.0, 0.0) == 1.0

    def test_matches_quadrature_on_random_triples(self):
        rng = seeded_rng(0)
        for _ in range(20):
            mean = rng.normal()
            sd = rng.uniform(0.05, 2.0)
            incumbent = rng.normal()
            got = expected_improvement(mean, sd, incumbent)
            assert got == pytest.approx(
                ei_quadrature(mean, sd, incumbent), abs=1e-8
            )

    def test_nonnegative_and_monotone_in_sd(self):
        rng = seeded_rng(1)
        for _ in range(50):
            mean, incumbent = rng.normal(size=2)
            sd = rng.uniform(0.05, 3.0)
            h = 1e-5
            lo = expected_improvement(mean, sd, incumbent)
            hi = expected_improvement(mean, sd + h, incumbent)
            assert lo >= 0.0
            assert hi - lo >= -1e-12


class TestProbabilityOfImprovement:
    def test_at_margin_is_half(self):
        assert probability_of_improvement(1.0, 1.0, 1.1, xi=0.1) == pytest.approx(0.5)

    def test_zero_sd_indicator(self):
        assert probability_of_improvement(5.0, 0.0, 0.0) == 0.0
        assert probability_of_improvement(-5.0, 0.0, 0.0) == 1.0

    def test_one_sd_below_margin(self):
        got = probability_of_improvement(-1.0, 1.0, 0.0, xi=0.0)
        assert got == pytest.approx(float(ndtr(1.0)), abs=1e-12)
        assert got == pytest.approx(0.8413447460685429, abs=1e-10)

    def test_bounds_and_monotonicity_in_mean(self):
        rng = seeded_rng(2)
        for _ in range(50):
            sd = rng.uniform(0.01, 2.0)
            incumbent = rng.normal()
            xi = rng.uniform(0, 0.5)
            means = np.sort(rng.normal(size=5))
            vals = [probability_of_improvement(m, sd, incumbent, xi) for m in means]
            assert all(0.0 <= v <= 1.0 for v in vals)
            assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_rejects_negative_xi(self):
        with pytest.raises(ValueError):
            probability_of_improvement(0.0, 1.0, 0.0, xi=-0.1)


class TestConfidenceBound:
    def test_zero(self):
        assert confidence_bound_score(0.0, 0.0, 2.0) == 0.0

    def test_example(self):
        assert confidence_bound_score(1.0, 1.0, 2.0) == pytest.approx(1.0)

    def test_argmax_shift_invariance(self):
        rng = seeded_rng(3)
        means = rng.normal(size=30)
        sds = rng.uniform(0.1, 1.0, size=30)
        base = confidence_bound_score(means, sds, 2.0)
        shifted = confidence_bound_score(means + 7.5, sds, 2.0)
        assert np.argmax(base) == np.argmax(shifted)


class TestMaximizer:
    DOMAIN = BoxDomain(np.array([0.0, 0.0]), np.array([1.0, 1.0]))

    def _single_point_model(self):
        kernel = KernelConfig(1.0, np.array([0.2, 0.2]), noise_variance=0.0)
        data = EvalDataset(np.array([[0.5, 0.5]]), np.array([0.0]))
        return build_gp(data, kernel, prior_mean=0.0)

    def test_moves_away_from_training_point(self):
        model = self._single_point_model()
        spec = AcquisitionSpec(incumbent=0.0)
        x = maximize_acquisition(model, spec, self.DOMAIN, MaximizerConfig(), seeded_rng(0))
        assert np.linalg.norm(x - np.array([0.5, 0.5])) > 0.05
        assert self.DOMAIN.contains(x)

    def test_deterministic_under_seed(self):
        model = self._single_point_model()
        spec = AcquisitionSpec(incumbent=0.0)
        a = maximize_acquisition(model, spec, self.DOMAIN, MaximizerConfig(), seeded_rng(9))
        b = maximize_acquisition(model, spec, self.DOMAIN, MaximizerConfig(), seeded_rng(9))
        np.testing.assert_array_equal(a, b)

    def test_result_in_box_when_pushed_to_face(self):
        # low observation near a corner pulls the posterior mean down there;
        # the confidence-bound score then climbs toward that face
        kernel = KernelConfig(1.0, np.array([0.5, 0.5]), noise_variance=0.0)
        data = EvalDataset(np.array([[0.05, 0.05], [0.9, 0.9]]), np.array([-2.0, 1.0]))
        model = build_gp(data, kernel, prior_mean=0.0)
        spec = AcquisitionSpec(kind="confidence-bound", incumbent=-2.0)
        x = maximize_acquisition(model, spec, self.DOMAIN, MaximizerConfig(), seeded_rng(4))
        assert self.DOMAIN.contains(x)

    def test_refinement_never_loses_to_raw_candidates(self):
        rng = seeded_rng(5)
        X = rng.uniform(size=(6, 2))
        y = np.sin(3 * X[:, 0]) + X[:, 1]
        model = fit_gp(EvalDataset(X, y), self.DOMAIN)
        spec = AcquisitionSpec(incumbent=float(y.min()))
        config = MaximizerConfig(candidate_count=64)
        x = maximize_acquisition(model, spec, self.DOMAIN, config, seeded_rng(13))
        raw = sample_uniform(self.DOMAIN, 64, seeded_rng(13))
        raw_scores = score_points(model, spec, raw)
        chosen = score_points(model, spec, x[None, :])[0]
        assert chosen >= raw_scores.max() - 1e-14

    def test_plateau_falls_back_to_uniform(self):
        # constant observations: the improvement probability is exactly 0.5
        # everywhere, a dead-flat surface
        data = EvalDataset(np.array([[0.2, 0.2], [0.8, 0.3], [0.5, 0.9]]), np.full(3, 2.0))
        model = fit_gp(data, self.DOMAIN)
        spec = AcquisitionSpec(kind="probability-of-improvement", incumbent=2.0)
        x, plateau = propose_next(model, spec, self.DOMAIN, MaximizerConfig(), seeded_rng(6))
        assert plateau
        assert self.DOMAIN.contains(x)

    def test_constant_model_still_explores_with_ei(self):
        # tiny but positive predictive spread keeps expected improvement
        # informative: the proposal lands away from the training points
        data = EvalDataset(np.array([[0.2, 0.2], [0.8, 0.3], [0.5, 0.9]]), np.full(3, 2.0))
        model = fit_gp(data, self.DOMAIN)
        spec = AcquisitionSpec(incumbent=2.0)
        x, plateau = propose_next(model, spec, self.DOMAIN, MaximizerConfig(), seeded_rng(6))
        assert self.DOMAIN.contains(x)
        dists = np.linalg.norm(data.X - x, axis=1)
        assert dists.min() > 0.05 or plateau

    def test_requires_finite_incumbent(self):
        model = self._single_point_model()
        spec = AcquisitionSpec()
        with pytest.raises(ValueError):
            maximize_acquisition(model, spec, self.DOMAIN, MaximizerConfig(), seeded_rng(0))

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            AcquisitionSpec(kind="entropy-search")
        with pytest.raises(ValueError):
            AcquisitionSpec(xi=-1.0)
        with pytest.raises(ValueError):
            AcquisitionSpec(kappa=0.0)
