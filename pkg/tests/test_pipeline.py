import numpy as np
import pytest

from nsaug.changepoint import ChangepointConfig
from nsaug.iaaft import IaaftConfig, expand_fixed, iaaft_fixed_edges
from nsaug.peaks import CONFIG_A, CONFIG_B, PeakConfig
from nsaug.pipeline import (MIN_SEGMENT, AugmentationRequest, augment, augment_ecg, augment_eeg,
                            augment_segments, segment_bounds)

from conftest import pulse_train


def test_segment_bounds():
    assert segment_bounds(2000, [1000]) == [(0, 1000), (1000, 2000)]
    assert segment_bounds(10, []) == [(0, 10)]
    assert segment_bounds(10, [0, 10, 4]) == [(0, 4), (4, 10)]


def test_two_segments_pin_both_sides_of_the_cut(rng):
    x = rng.standard_normal(2000)
    out, diags = augment_segments(x, [1000], IaaftConfig(n_surrogates=2, rng_seed=1))
    assert out.shape == (2, 2000)
    for s in out:
        assert np.array_equal(s[900:1100], x[900:1100])
        assert np.array_equal(s[:100], x[:100]) and np.array_equal(s[1900:], x[1900:])
        assert not np.array_equal(s[100:900], x[100:900])
    assert [d["start"] for d in diags] == [0, 1000]


def test_short_segment_copied(rng):
    x = rng.standard_normal(500)
    out, diags = augment_segments(x, [10, 300], IaaftConfig(rng_seed=0))
    assert np.array_equal(out[0, :10], x[:10])
    assert diags[0]["copied"] and not diags[1]["copied"]
    assert 10 < MIN_SEGMENT


def test_no_changepoints_equals_whole_signal_surrogate():
    x = np.random.default_rng(5).standard_normal(10_000)  # detector reports nothing here
    cfg = IaaftConfig(n_surrogates=1, rng_seed=3)
    res = augment_eeg(AugmentationRequest(x, 256, iaaft_cfg=cfg))
    assert res.provenance[0].indices.size == 0
    whole = iaaft_fixed_edges(x, cfg, stream=(0, 0))
    assert np.array_equal(res.surrogates[0, 0], whole.surrogates[0])


def test_eeg_multichannel_lengths_and_determinism():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((2, 4000))
    x[0, 2000:] *= 5
    req = AugmentationRequest(x, 256, iaaft_cfg=IaaftConfig(rng_seed=4), n_surrogates=2)
    a = augment(req)
    b = augment(AugmentationRequest(x, 256, iaaft_cfg=IaaftConfig(rng_seed=4), n_surrogates=2))
    assert a.surrogates.shape == (2, 2, 4000)
    assert np.array_equal(a.surrogates, b.surrogates)
    for ch in range(2):
        cps = a.provenance[ch].indices
        for s in a.surrogates[:, ch]:
            for (start, stop) in segment_bounds(4000, cps):
                m = int(np.floor(0.1 * (stop - start) + 1e-9))
                assert np.array_equal(s[start:start + m], x[ch, start:start + m])
                assert np.array_equal(s[stop - m:stop], x[ch, stop - m:stop])
                assert np.array_equal(np.sort(s[start:stop]), np.sort(x[ch, start:stop]))
    # channels draw independent phases
    assert not np.array_equal(a.surrogates[0, 0, 500:600], a.surrogates[0, 1, 500:600])


def test_union_channels_shares_changepoints():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((2, 5000))
    x[0, 2500:] *= 5
    res = augment_eeg(AugmentationRequest(x, 256, union_channels=True))
    assert np.array_equal(res.provenance[0].indices, res.provenance[1].indices)


def test_ecg_flat_line():
    x = np.full(600, 0.3)
    res = augment_ecg(AugmentationRequest(x, 300, mode="ecg"))
    fx = res.provenance[0]
    assert fx.peaks.size == 0 and fx.gap_fills.size > 0
    np.testing.assert_allclose(res.surrogates[0, 0], x, rtol=1e-14)


@pytest.mark.parametrize("conf", [CONFIG_A, CONFIG_B])
def test_ecg_recipe_preserves_peaks(conf):
    x, _ = pulse_train(3)
    req = AugmentationRequest(
        x, 300, mode="ecg",
        peak_cfg=PeakConfig(conf["min_distance"], conf["max_interval"]),
        iaaft_cfg=IaaftConfig(point_margin=conf["point_margin"], rng_seed=2))
    res = augment_ecg(req)
    fx = res.provenance[0]
    s = res.surrogates[0, 0]
    assert fx.peaks.size > 0
    assert np.array_equal(s[fx.peaks], x[fx.peaks])
    assert np.all(np.diff(fx.indices) <= conf["max_interval"])
    free = ~expand_fixed(fx.indices, x.size, conf["point_margin"])
    assert np.mean(s[free] != x[free]) > 0.5


def test_config_b_pins_more_than_a():
    x, _ = pulse_train(4)
    pinned = {}
    for name, conf in (("A", CONFIG_A), ("B", CONFIG_B)):
        res = augment_ecg(AugmentationRequest(
            x, 300, mode="ecg", peak_cfg=PeakConfig(conf["min_distance"], conf["max_interval"]),
            iaaft_cfg=IaaftConfig(point_margin=conf["point_margin"], rng_seed=0)))
        pinned[name] = res.diagnostics[0][0]["pinned_samples"]
    assert pinned["B"] >= pinned["A"]


def test_request_validation():
    with pytest.raises(ValueError):
        AugmentationRequest(np.zeros(10), 256, mode="emg")
    with pytest.raises(ValueError):
        augment_ecg(AugmentationRequest(np.zeros(10), 256, mode="eeg"))
