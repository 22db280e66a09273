import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from nsaug.changepoint import (ChangepointConfig, confirm_density, detect_changepoints,
                               detect_excursions, ewma, excursion_mask, lagged_diff,
                               merge_and_filter)
from nsaug.core import DiagnosticSequence, Signal
from nsaug.errors import EmptyInputError, InsufficientLengthError

from conftest import variance_step


def ewma_direct(x, lam):
    """Weighted average by explicit summation over the full history."""
    out = []
    for n in range(len(x)):
        w = [lam ** (n - l) for l in range(n + 1)]
        out.append(math.fsum(wi * xi for wi, xi in zip(w, x[: n + 1])) / math.fsum(w))
    return np.array(out)


def test_ewma_constant():
    np.testing.assert_allclose(ewma(np.full(50, 3.3), 0.9).values, 3.3, rtol=1e-14)


def test_ewma_two_points():
    np.testing.assert_allclose(ewma([0.0, 1.0], 0.5).values, [0.0, 2 / 3], rtol=1e-15)


def test_ewma_impulse_decays():
    x = np.zeros(60)
    x[0] = 1.0
    out = ewma(x, 0.9)
    n = np.arange(1, 61)
    w = (1 - 0.9**n) / (1 - 0.9)
    np.testing.assert_allclose(out.values, 0.9 ** (n - 1) / w, rtol=1e-12)
    assert np.all(np.diff(out.values) < 0)
    assert out.normalizers[0] == 1
    assert np.all(np.diff(out.normalizers) > 0) and out.normalizers[-1] < 1 / (1 - 0.9)


def test_ewma_matches_direct_sum(rng):
    x = rng.standard_normal(300)
    np.testing.assert_allclose(ewma(x, 0.9).values, ewma_direct(x, 0.9), rtol=1e-12, atol=1e-14)


def test_ewma_rejects_empty_and_bad_lambda():
    with pytest.raises(EmptyInputError):
        ewma([], 0.9)
    with pytest.raises(ValueError):
        ewma([1.0, 2.0], 1.0)


def test_lagged_diff_constant_and_linear():
    assert np.all(lagged_diff(np.full(40, 2.0), 16).values == 0)
    ld = lagged_diff(0.5 * np.arange(40.0), 16)
    np.testing.assert_allclose(ld.values, 0.5 * 16)
    assert len(ld.values) == 40 - 16


def test_lagged_diff_step():
    p, h, k = 30, 2.5, 8
    e = np.zeros(80)
    e[p:] = h
    y = lagged_diff(e, k).values
    # y index j is the pair (j + k, j)
    n = np.arange(k, 80)
    assert np.all(y[(n >= p) & (n < p + k)] == h)
    assert np.all(y[(n < p) | (n >= p + k)] == 0)


def test_lagged_diff_too_short():
    with pytest.raises(InsufficientLengthError):
        lagged_diff(np.ones(16), 16)


def test_excursions_constant_is_empty():
    assert detect_excursions(np.ones(200), 4.0, 10).size == 0


def test_excursions_seeded_noise_brute_force():
    y = np.random.default_rng(3).standard_normal(10_000)
    ref = y[64:]
    m, s = ref.mean(), ref.std()
    brute = [i for i in range(64, y.size) if abs(y[i] - m) > 4 * s]
    assert brute == [5970]
    assert detect_excursions(y, 4.0, 64).tolist() == brute


def test_excursions_block():
    y = np.zeros(2000)
    y[500:521] = 100
    assert set(range(500, 521)) <= set(detect_excursions(y, 4.0, 0).tolist())


def test_density_rejects_isolated_spike():
    y = np.zeros(300)
    y[150] = 50
    cand = detect_excursions(y, 4.0, 0)
    assert cand.tolist() == [150]
    assert confirm_density(cand, y, 16, 0.7, 4.0).size == 0


def test_density_keeps_sustained_block():
    y = np.zeros(2000)
    y[100:125] = 50
    cand = detect_excursions(y, 4.0, 0)
    assert cand.tolist() == list(range(100, 125))
    kept = confirm_density(cand, y, 16, 0.7, 4.0)
    assert 112 in kept.tolist()


def test_density_boundary_12_of_17():
    y = np.zeros(1000)
    y[492:504] = 100  # neighbourhood of 500 is 492..508 -> 12 of 17 above threshold
    assert excursion_mask(y, 4.0)[492:509].sum() == 12
    assert confirm_density([500], y, 16, 0.7, 4.0).tolist() == [500]
    y[503] = 0
    assert confirm_density([500], y, 16, 0.7, 4.0).size == 0


def test_merge_and_filter_examples():
    cs = merge_and_filter({"a": [100], "b": [150, 600]}, 256)
    assert cs.indices.tolist() == [100, 600]
    assert merge_and_filter({"a": []}, 256).indices.size == 0
    assert merge_and_filter({"a": [400], "b": [400]}, 256).indices.tolist() == [400]


def test_merge_applies_offsets():
    cs = merge_and_filter({"a": [10], "b": [10]}, 5, offsets={"b": 79})
    assert cs.indices.tolist() == [10, 89]


def test_detect_changepoints_variance_step():
    rng = np.random.default_rng(42)
    x = rng.standard_normal(10_000)
    x[5000:] *= 5
    cs = detect_changepoints(Signal(x, 256))
    near = cs.indices[np.abs(cs.indices - 5000) <= 256]
    assert near.tolist() == [5009]
    # later detections come from the noisier second regime
    assert cs.indices.tolist() == [5009, 5632, 6583]


def test_detect_changepoints_stationary_regression():
    x = np.random.default_rng(5).standard_normal(10_000)
    assert detect_changepoints(Signal(x, 256)).indices.tolist() == []
    x = np.random.default_rng(2).standard_normal(10_000)
    assert detect_changepoints(Signal(x, 256)).indices.tolist() == [2995]


def test_detect_changepoints_constant():
    cs = detect_changepoints(Signal(np.full(2000, 1.5), 256))
    assert cs.indices.size == 0
    assert all(len(v) == 0 for v in cs.per_feature.values())


def test_detect_changepoints_short_signal():
    with pytest.raises(InsufficientLengthError):
        detect_changepoints(Signal(np.random.default_rng(0).standard_normal(100), 256))


def test_config_validation():
    with pytest.raises(ValueError):
        ChangepointConfig(lambda_=1.2)
    with pytest.raises(ValueError):
        ChangepointConfig(density=0)
    assert ChangepointConfig().to_dict()["lambda"] == 0.9


def test_step_locality():
    # moving the step moves the detection by the same amount, up to the lag
    base, shifted = [], []
    for loc, store in ((4000, base), (4600, shifted)):
        rng = np.random.default_rng(9)
        x = rng.standard_normal(10_000)
        x[loc:] *= 5
        cs = detect_changepoints(Signal(x, 256))
        store.append(cs.indices[np.abs(cs.indices - loc) <= 256][0] - loc)
    assert abs(base[0] - shifted[0]) <= 16


vals = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=100, deadline=None)
@given(arrays(float, st.integers(1, 200), elements=vals), st.floats(0.01, 0.99))
def test_ewma_property_vs_direct(x, lam):
    got = ewma(x, lam).values
    want = ewma_direct(x, lam)
    scale = max(1.0, np.abs(x).max())
    assert np.all(np.abs(got - want) <= 1e-12 * scale)


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.integers(40, 200), elements=st.floats(-100, 100)),
       st.floats(0.1, 50))
def test_excursions_scale_invariant(y, a):
    assert detect_excursions(y, 3.0, 5).tolist() == detect_excursions(a * y, 3.0, 5).tolist()


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.integers(40, 200), elements=st.floats(-100, 100)))
def test_confirmed_subset_of_excursions(y):
    cand = detect_excursions(y, 2.0, 0)
    conf = confirm_density(cand, y, 8, 0.7, 2.0)
    assert set(conf.tolist()) <= set(cand.tolist())


@settings(max_examples=100, deadline=None)
@given(st.dictionaries(st.sampled_from("abcde"),
                       st.lists(st.integers(0, 5000), max_size=30)),
       st.integers(1, 600))
def test_merge_gaps(per_feature, sep):
    idx = merge_and_filter(per_feature, sep).indices
    assert np.all(np.diff(idx) >= sep)
    pooled = sorted({i for v in per_feature.values() for i in v})
    assert set(idx.tolist()) <= set(pooled)
    if pooled:
        assert idx[0] == pooled[0]
