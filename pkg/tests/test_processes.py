import math
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qharness.errors import DomainViolation, GridMismatch, InvalidDescriptor
from qharness.sim import (
    PROCESSES,
    BinomialBridge,
    DirichletBridge,
    Gamma,
    GammaRandomScale,
    MixLaw,
    PathEnsemble,
    Poisson,
    Wiener,
    WienerDrift,
    WienerShift,
    descriptor_from_json,
    sample_ensemble,
)
from qharness.verify import estimate_mean_cov


def within(est, target, se, k=3.0):
    return abs(est - target) <= k * se


def test_binomial_endpoint_pinned():
    e = sample_ensemble(BinomialBridge(2, 1.0), [1.0], 500, 3)
    assert np.all(e.values == 2)


def test_dirichlet_mean():
    e = sample_ensemble(DirichletBridge(1.0, 1.0), [0.5], 100_000, 11)
    mc = estimate_mean_cov(e)
    assert within(mc.mean[0], 0.5, mc.se_mean[0])


def test_poisson_variance():
    e = sample_ensemble(Poisson(1.0), [1.0], 100_000, 12)
    mc = estimate_mean_cov(e)
    assert within(mc.cov[0, 0], 1.0, mc.se_cov[0, 0])


def test_dirichlet_marginal_is_beta():
    c, V, t = 2.0, 1.5, 0.6
    e = sample_ensemble(DirichletBridge(c, V), [t, V], 100_000, 13)
    mc = estimate_mean_cov(e)
    a, b = c * t, c * (V - t)
    assert within(mc.mean[0], a / (a + b), mc.se_mean[0])
    assert within(mc.cov[0, 0], a * b / ((a + b) ** 2 * (a + b + 1)), mc.se_cov[0, 0])
    assert np.all(e.values[:, 1] == 1.0)


@pytest.mark.parametrize(
    "d, times",
    [
        (Poisson(2.0), [0.5, 1.0, 3.0]),
        (Gamma(1.5, 2.0), [0.5, 1.0, 3.0]),
        (DirichletBridge(1.0, 2.0), [0.5, 1.0, 2.0]),
        (BinomialBridge(5, 2.0), [0.5, 1.0, 2.0]),
    ],
)
def test_monotone_rows(d, times):
    v = sample_ensemble(d, times, 5000, 4).values
    assert np.all(np.diff(v, axis=1) >= 0)
    assert np.all(v[:, 0] >= 0)


def test_binomial_values_are_integers():
    v = sample_ensemble(BinomialBridge(4, 1.0), [0.25, 0.5, 0.75, 1.0], 2000, 1).values
    assert np.array_equal(v, np.round(v)) and v.min() >= 0 and v.max() <= 4


@pytest.mark.parametrize("d, times", [
    (Wiener(), [1.0, 2.0, 3.0]),
    (WienerDrift(1.0), [0.2, 0.5]),
    (WienerShift(0.5, MixLaw((-1.0, 2.0), (2 / 3, 1 / 3))), [0.5, 1.0]),
    (Poisson(1.3), [1.0, 2.5]),
    (Gamma(2.0, 0.5), [1.0, 2.0]),
    (DirichletBridge(2.0, 1.0), [0.3, 0.6]),
    (BinomialBridge(3, 1.0), [0.3, 0.6]),
    (GammaRandomScale(), [1.0, 2.0]),
])
def test_harness_description_matches_moments(d, times):
    """Mean line and product covariance reported by harness() agree with MC."""
    h = d.harness()
    e = sample_ensemble(d, times, 100_000, 21)
    mc = estimate_mean_cov(e)
    a, b, c, dd = h.cov_product
    for i, s in enumerate(times):
        assert within(mc.mean[i], h.mean.at(s), mc.se_mean[i] + 1e-12)
        for j in range(i, len(times)):
            t = times[j]
            assert within(mc.cov[i, j], (a * s + b) * (c * t + dd), mc.se_cov[i, j] + 1e-12)


def test_reproducible_across_threads_and_sizes(monkeypatch):
    d = GammaRandomScale()
    times = [0.5, 1.0, 2.0]
    monkeypatch.setenv("QH_THREADS", "1")
    one = sample_ensemble(d, times, 20_000, 99)
    monkeypatch.setenv("QH_THREADS", "4")
    four = sample_ensemble(d, times, 20_000, 99)
    bigger = sample_ensemble(d, times, 25_000, 99)
    assert np.array_equal(one.values, four.values)
    assert np.array_equal(one.values, bigger.values[:20_000])


def test_seed_changes_paths():
    a = sample_ensemble(Wiener(), [1.0], 10, 1).values
    b = sample_ensemble(Wiener(), [1.0], 10, 2).values
    assert not np.array_equal(a, b)


def test_grid_validation():
    with pytest.raises(DomainViolation):
        sample_ensemble(Wiener(), [2.0, 1.0], 10, 0)
    with pytest.raises(DomainViolation):
        sample_ensemble(DirichletBridge(1.0, 1.0), [0.5, 1.5], 10, 0)
    with pytest.raises(DomainViolation):
        sample_ensemble(WienerShift(1.0), [0.5], 10, 0)
    with pytest.raises(InvalidDescriptor):
        Poisson(-1.0)
    with pytest.raises(InvalidDescriptor):
        BinomialBridge(0, 1.0)


def test_mixlaw():
    law = MixLaw((1.0, 3.0), (0.25, 0.75))
    assert law.mean == 2.5 and law.second_moment == 7.0 and math.isclose(law.variance, 0.75)
    assert np.array_equal(law.quantile(np.array([0.1, 0.25, 0.26, 0.99])), [1.0, 1.0, 3.0, 3.0])
    assert MixLaw.from_json(law.to_json()) == law
    with pytest.raises(InvalidDescriptor):
        MixLaw((1.0,), (0.5,))


@pytest.mark.parametrize("kind", sorted(PROCESSES))
def test_descriptor_json_round_trip(kind):
    d = PROCESSES[kind]()
    assert descriptor_from_json(d.to_json()) == d


def test_unknown_descriptor():
    with pytest.raises(InvalidDescriptor):
        descriptor_from_json({"kind": "levy-flight"})


def test_ensemble_is_read_only():
    e = PathEnsemble([1.0, 2.0], [[1.0, 2.0]])
    with pytest.raises(ValueError):
        e.values[0, 0] = 5.0
    assert e.column(2.0) == 1
    with pytest.raises(GridMismatch):
        e.at(3.0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 300))
def test_row_depends_on_seed_and_index_only(seed, n):
    d = Poisson(1.0)
    full = sample_ensemble(d, [1.0, 2.0], n, seed).values
    last = sample_ensemble(d, [1.0, 2.0], n + 7, seed).values
    assert np.array_equal(full, last[:n])
