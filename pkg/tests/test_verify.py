from fractions import Fraction as Q
from itertools import combinations

import numpy as np
import pytest

from qharness.errors import EmptyEnsemble, MismatchedTriples
from qharness.params import QHParams
from qharness.sim import (
    BinomialBridge,
    BinomialTransform,
    DirichletBridge,
    DirichletTransform,
    PathEnsemble,
    Transformed,
    Wiener,
    binomial_prediction,
    sample_ensemble,
)
from qharness.sim.exact import enumerate_binomial_bridge
from qharness.verify import (
    LINEAR_BASIS,
    VARIANCE_BASIS,
    Prediction,
    check_harness,
    compare_to_prediction,
    estimate_mean_cov,
    fit_conditional_variance,
)

WIENER = QHParams(0.0, 0.0, 0.0, 0.0, 1.0)


@pytest.fixture(scope="module")
def wiener():
    return sample_ensemble(Wiener(), [1.0, 2.0, 3.0], 200_000, 2024)


def test_constant_ensemble():
    mc = estimate_mean_cov(PathEnsemble([1.0, 2.0], np.full((10, 2), 7.0)))
    assert np.all(mc.mean == 7.0) and np.all(mc.cov == 0.0)


def test_wiener_covariance(wiener):
    mc = estimate_mean_cov(wiener)
    assert abs(mc.cov[0, 1] - 1.0) <= 3 * mc.se_cov[0, 1]


def test_transformed_dirichlet_covariance():
    e = sample_ensemble(Transformed(DirichletBridge(1.0, 1.0), DirichletTransform.build(1.0, 1.0)), [1.0, 2.0], 100_000, 3)
    mc = estimate_mean_cov(e)
    assert np.all(np.abs(mc.cov - np.minimum.outer(e.times, e.times)) <= 3 * mc.se_cov)


def test_too_few_paths():
    with pytest.raises(EmptyEnsemble):
        estimate_mean_cov(PathEnsemble([1.0], [[1.0]]))


def test_exact_linear_ensemble():
    rng = np.random.default_rng(0)
    xs, xu = rng.standard_normal(500), rng.standard_normal(500)
    s, t, u = 1.0, 1.5, 3.0
    xt = ((u - t) * xs + (t - s) * xu) / (u - s)
    fit = check_harness(PathEnsemble([s, t, u], np.column_stack([xs, xt, xu])), s, t, u)
    assert np.allclose(fit.linear.fitted, [0.0, 0.75, 0.25], atol=1e-12, rtol=0)
    assert np.all(fit.linear.se <= 1e-12)


def test_deterministic_variance_ensemble():
    rng = np.random.default_rng(1)
    n, kappa = 4000, 0.3
    xs, xu = rng.standard_normal(n), 1.0 + rng.standard_normal(n)
    s, t, u = 1.0, 2.0, 3.0
    sign = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    xt = (xs + xu) / 2 + np.sqrt(kappa) * sign
    fit = fit_conditional_variance(PathEnsemble([s, t, u], np.column_stack([xs, xt, xu])), s, t, u)
    assert np.allclose(fit.variance.fitted, [kappa, 0, 0, 0, 0, 0], atol=1e-10)


def test_wiener_fit(wiener):
    fit = fit_conditional_variance(wiener, 1.0, 2.0, 3.0)
    out = compare_to_prediction(fit, Prediction(WIENER, (1.0, 2.0, 3.0)))
    assert out.verdict == "PASS", out.failing()
    assert np.allclose(out.variance.predicted, [0.5, 0, 0, 0, 0, 0])
    assert np.allclose(out.linear.predicted, [0.0, 0.5, 0.5])


def test_fit_is_deterministic(wiener):
    a = fit_conditional_variance(wiener, 1.0, 2.0, 3.0).to_json()
    b = fit_conditional_variance(wiener, 1.0, 2.0, 3.0).to_json()
    assert a == b


def test_binomial_linear_fit_on_exact_law():
    grid = (Q(1, 4), Q(1, 2), Q(3, 4))
    e = enumerate_binomial_bridge(3, 1, grid).as_ensemble()
    fit = check_harness(e, 0.25, 0.5, 0.75)
    assert np.allclose(fit.linear.fitted, [0.0, 0.5, 0.5], atol=1e-12, rtol=0)
    assert np.all(fit.linear.se == 0)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_oracle_equivalence_every_triple(N):
    grid = (Q(1, 5), Q(2, 5), Q(1, 2), Q(4, 5))
    e = enumerate_binomial_bridge(N, 1, grid).as_ensemble()
    for s, t, u in combinations([float(x) for x in grid], 3):
        fit = fit_conditional_variance(e, s, t, u)
        closed = np.array([0.0, (u - t) * (t - s) / (u - s), 0, 0, 0, 0])
        kept = list(fit.variance.kept)
        assert np.allclose(fit.variance.fitted[kept], fit.variance.projector @ closed, atol=1e-12, rtol=0)


def test_pinned_endpoint_is_reported_not_fatal():
    e = sample_ensemble(BinomialBridge(3, 1.0), [0.25, 0.5, 1.0], 5000, 0)
    fit = fit_conditional_variance(e, 0.25, 0.5, 1.0)
    assert fit.linear.dropped  # X_u = N is collinear with the intercept
    assert fit.variance.dropped


def test_binomial_mc_matches_exact_oracle():
    N, V = 4, 1.0
    targets = [1 / 3, 1.0, 3.0]  # images of 1/4, 1/2, 3/4
    e = sample_ensemble(Transformed(BinomialBridge(N, V), BinomialTransform.build(N, V)), targets, 200_000, 41)
    fit = fit_conditional_variance(e, *targets)
    law = enumerate_binomial_bridge(N, 1, (Q(1, 4), Q(1, 2), Q(3, 4))).as_ensemble()
    from qharness.sim import transform_paths

    exact = fit_conditional_variance(transform_paths(law, BinomialTransform.build(N, V), targets), *targets)
    assert exact.variance.dropped == fit.variance.dropped
    kept = list(fit.variance.kept)
    diff = np.abs(fit.variance.fitted[kept] - exact.variance.fitted[kept])
    assert np.all(diff <= 3 * fit.variance.se[kept])
    out = compare_to_prediction(exact, Prediction(binomial_prediction(N, V), tuple(targets)))
    assert out.verdict == "PASS"


def test_compare_exact_match_and_failure_naming():
    rng = np.random.default_rng(3)
    n = 20_000
    xs = rng.standard_normal(n)
    xu = xs + rng.standard_normal(n) * np.sqrt(2)
    xt = (xs + xu) / 2 + rng.standard_normal(n) * np.sqrt(0.5)
    fit = fit_conditional_variance(PathEnsemble([1.0, 2.0, 3.0], np.column_stack([xs, xt, xu])), 1.0, 2.0, 3.0)

    class Shifted(Prediction):
        def variance(self):
            v = super().variance()
            v[3] += 10 * fit.variance.se[3]
            return v

    ok = compare_to_prediction(fit, Prediction(WIENER, (1.0, 2.0, 3.0)))
    assert ok.verdict == "PASS"
    bad = compare_to_prediction(fit, Shifted(WIENER, (1.0, 2.0, 3.0)))
    assert bad.verdict == "FAIL"
    assert bad.failing() == ["variance:" + VARIANCE_BASIS[3]]


def test_zero_se_uses_absolute_tolerance():
    grid = (Q(1, 4), Q(1, 2), Q(3, 4))
    law = enumerate_binomial_bridge(2, 1, grid).as_ensemble()
    fit = check_harness(law, 0.25, 0.5, 0.75)
    good = compare_to_prediction(fit, Prediction(WIENER, (0.25, 0.5, 0.75)))
    assert good.verdict == "PASS"

    class Off(Prediction):
        def linear(self):
            return super().linear() + np.array([0.0, 1e-9, 0.0])

    assert compare_to_prediction(fit, Off(WIENER, (0.25, 0.5, 0.75))).failing() == ["linear:" + LINEAR_BASIS[1]]


def test_mismatched_triples(wiener):
    fit = check_harness(wiener, 1.0, 2.0, 3.0)
    with pytest.raises(MismatchedTriples):
        compare_to_prediction(fit, Prediction(WIENER, (1.0, 2.5, 3.0)))


def test_report_json_shape(wiener):
    out = compare_to_prediction(fit_conditional_variance(wiener, 1.0, 2.0, 3.0), Prediction(WIENER, (1.0, 2.0, 3.0)))
    js = out.to_json()
    assert set(js) >= {"triple", "linear", "variance", "verdict"}
    assert set(js["variance"]) >= {"basis", "fitted", "se", "predicted", "z"}
    assert js["variance"]["basis"] == list(VARIANCE_BASIS)
