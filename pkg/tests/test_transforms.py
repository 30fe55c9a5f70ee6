import math

import numpy as np
import pytest

from qharness.conditioning import bridge_params, condition_on_future, condition_on_past
from qharness.errors import GridMismatch, InvalidDescriptor, NonpositiveK
from qharness.params import AffineMap, QHParams
from qharness.sim import (
    PROCESSES,
    AffineTransform,
    BinomialBridge,
    BinomialTransform,
    BridgeTransform,
    DirichletBridge,
    DirichletTransform,
    FutureTransform,
    Gamma,
    PastTransform,
    Poisson,
    StandardizingTransform,
    Transformed,
    Wiener,
    WienerDrift,
    binomial_prediction,
    descriptor_from_json,
    dirichlet_prediction,
    sample_ensemble,
    source_grid,
    standardize,
    transform_from_json,
    transform_paths,
)
from qharness.verify import estimate_mean_cov


def assert_standard(e, k=3.0):
    """Mean 0 and covariance min(s, t) within k standard errors."""
    mc = estimate_mean_cov(e)
    t = e.times
    assert np.all(np.abs(mc.mean) <= k * mc.se_mean), (mc.mean, mc.se_mean)
    target = np.minimum.outer(t, t)
    assert np.all(np.abs(mc.cov - target) <= k * mc.se_cov), (mc.cov, mc.se_cov)


def sample_transformed(base, transform, targets, n, seed):
    return sample_ensemble(Transformed(base, transform), targets, n, seed)


def test_identity_transform():
    e = sample_ensemble(Wiener(), [1.0, 2.0], 100, 0)
    out = transform_paths(e, AffineTransform.identity(), [1.0, 2.0])
    assert np.array_equal(out.values, e.values)


def test_dirichlet_transform_covariance():
    tr = DirichletTransform.build(1.0, 1.0)
    src = source_grid(tr, [1.0, 2.0])
    assert np.allclose(src, [0.5, 2 / 3])
    e = sample_ensemble(DirichletBridge(1.0, 1.0), src, 100_000, 5)
    assert_standard(transform_paths(e, tr, [1.0, 2.0]))


def test_binomial_transform_mean_zero():
    e = sample_transformed(BinomialBridge(1, 1.0), BinomialTransform.build(1, 1.0), [0.5, 1.0, 3.0], 100_000, 6)
    mc = estimate_mean_cov(e)
    assert np.all(np.abs(mc.mean) <= 3 * mc.se_mean)


def test_literal_drift_subscript_fails_and_corrected_one_passes():
    base = WienerDrift(1.0)
    targets = [0.25, 0.5]
    literal = AffineTransform(AffineMap(0.0, 1.0, -1.0, 1.0))  # (1 - t) X_{1/(1-t)}
    corrected = AffineTransform(AffineMap(1.0, 0.0, -1.0, 1.0))  # (1 - t) X_{t/(1-t)}
    e = sample_transformed(base, literal, targets, 100_000, 7)
    mc = estimate_mean_cov(e)
    assert abs(mc.cov[0, 1] - 0.25) > 10 * mc.se_cov[0, 1]
    assert math.isclose(mc.cov[0, 1], 1.5, rel_tol=0.05)  # (3/4)(1/2)(4/3)(1+2)
    assert_standard(sample_transformed(base, corrected, targets, 100_000, 7))


@pytest.mark.parametrize("kind", sorted(PROCESSES))
def test_standardize_every_process(kind):
    d = PROCESSES[kind]()
    std = standardize(d)
    lo, hi = std.interval
    hi = min(hi, lo + 4.0)
    targets = list(lo + (hi - lo) * np.array([0.2, 0.5, 0.8]))
    e = sample_transformed(d, std.transform, targets, 100_000, 8)
    assert_standard(e)


def scale_free(p):
    """Quantities unchanged by scale_transform."""
    p = p.to_float()
    return np.array([p.gamma, p.sigma * p.tau, p.eta * p.theta, p.theta**2 / p.tau if p.tau else math.nan])


@pytest.mark.parametrize("c, V", [(1.0, 1.0), (2.0, 0.5), (0.5, 3.0)])
def test_generic_standardization_agrees_with_dirichlet_formula(c, V):
    got = standardize(DirichletBridge(c, V)).params
    assert np.allclose(scale_free(got), scale_free(dirichlet_prediction(c, V)), rtol=1e-12)


@pytest.mark.parametrize("N, V", [(1, 1.0), (3, 2.0), (5, 0.5)])
def test_generic_standardization_agrees_with_binomial_formula(N, V):
    got = standardize(BinomialBridge(N, V)).params
    want = binomial_prediction(N, V)
    assert math.isclose(got.eta * got.theta, want.eta * want.theta, rel_tol=1e-12)
    assert got.sigma == got.tau == 0.0 and got.gamma == 1.0


def test_dirichlet_prediction_structure():
    p = dirichlet_prediction(1.0, 2.0)
    assert math.isclose(p.theta**2, 4 * p.tau) and math.isclose(p.eta**2, 4 * p.sigma)
    assert math.isclose(p.gamma, 1 - 2 * math.sqrt(p.sigma * p.tau))


def centered(d):
    return Transformed(d, AffineTransform(AffineMap(1.0, 0.0, 0.0, 1.0, -1.0, 0.0)))


@pytest.mark.parametrize("R", [0.0, 0.5])
def test_bridge_with_random_endpoints_is_standard(R):
    # G_t - t for a unit gamma process lies in QH(0, 2; 0, 1; 1) and K = (1 + Delta)^2 > 0 a.s.
    p = QHParams(0.0, 2.0, 0.0, 1.0, 1.0)
    tr = BridgeTransform(R, 2.0, p)
    e = sample_transformed(centered(Gamma(1.0, 1.0)), tr, [0.5, 1.0, 4.0], 100_000, 9)
    assert_standard(e)


def test_poisson_bridge_hits_zero_K():
    # X_V = 0 has positive probability, and then K(Delta) = 0
    tr = BridgeTransform(0.0, 2.0, QHParams(0.0, 1.0, 0.0, 0.0, 1.0))
    with pytest.raises(NonpositiveK):
        sample_transformed(centered(Poisson(1.0)), tr, [1.0], 1000, 9)


def test_bridge_of_centered_binomial_is_future_conditioning():
    N, V = 3, 2.0
    p = QHParams(0.0, 1.0, 0.0, 0.0, 1.0)
    shifted = centered(BinomialBridge(N, V))
    tr = BridgeTransform(0.0, V, p, 0.0, N - V)
    got = bridge_params(p, 0.0, V, 0.0, N - V).params
    assert got.astuple() == pytest.approx(binomial_prediction(N, V).astuple(), rel=1e-12)
    assert_standard(sample_transformed(shifted, tr, [0.5, 1.0, 4.0], 100_000, 10))


def test_future_and_past_transforms_match_affine_maps():
    p = QHParams(0.2, 0.5, 0.1, 0.3, 0.8)
    e = sample_ensemble(Wiener(), [0.5, 1.0, 1.5, 2.0, 3.0], 10, 0)
    fut = FutureTransform(2.0, p, 0.4)
    f = condition_on_future(p, 2.0, 0.4).transform
    targets = [fut.target_time(0.5), fut.target_time(1.0)]
    out = transform_paths(e, fut, targets)
    for j, t in enumerate(targets):
        x = e.at(f.mobius(t))
        assert np.allclose(out.values[:, j], f.space_factor(t) * x + f.m1 * t + f.m2)
    past = PastTransform(1.0, p, 0.3)
    g = condition_on_past(p, 1.0, 0.3).transform
    out = transform_paths(e, past, [0.5, 1.0])
    assert np.allclose(out.values[:, 1], g.space_factor(1.0) * e.at(2.0) + g.m1 + g.m2)


def test_grid_mismatch():
    e = sample_ensemble(Wiener(), [1.0, 2.0], 10, 0)
    with pytest.raises(GridMismatch):
        transform_paths(e, DirichletTransform.build(1.0, 1.0), [1.0])


def test_nonpositive_K_names_the_path():
    p = QHParams(0.0, 1.0, 0.0, 0.0, 1.0)
    values = np.array([[0.1, 1.0], [0.2, -0.5], [0.3, -3.0]])
    from qharness.sim import PathEnsemble

    e = PathEnsemble([0.5, 1.0], values)
    with pytest.raises(NonpositiveK) as info:
        transform_paths(e, BridgeTransform(0.0, 1.0, p), [1.0])
    assert info.value.path_index == 2


def test_bridge_needs_params_or_M():
    with pytest.raises(InvalidDescriptor):
        BridgeTransform(0.0, 1.0)
    with pytest.raises(InvalidDescriptor):
        BridgeTransform(2.0, 1.0, M=1.0)


@pytest.mark.parametrize(
    "tr",
    [
        StandardizingTransform.build((1.0, 0.0, 1.0, 1.0), 0.5, 2.0),
        DirichletTransform.build(2.0, 3.0),
        BinomialTransform.build(4, 2.0),
        BridgeTransform(0.5, 2.0, QHParams(0.0, 1.0, 0.0, 0.0, 1.0)),
        FutureTransform(2.0, QHParams(0.0, 1.0, 0.0, 0.0, 1.0), 1.0),
        PastTransform(1.0, QHParams(0.0, 1.0, 0.0, 0.0, 1.0)),
    ],
)
def test_transform_json_round_trip(tr):
    assert transform_from_json(tr.to_json()) == tr
    d = Transformed(Wiener(), tr)
    assert descriptor_from_json(d.to_json()) == d
