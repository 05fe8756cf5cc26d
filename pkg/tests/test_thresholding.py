import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from umthresh import GrayImage, PeakSet, compute_histogram
from umthresh.datasets import case1_image
from umthresh.exceptions import EmptyOverlap
from umthresh.histogram import Peak
from umthresh.povm import GaussianEffect, IntensityBasis
from umthresh.thresholding import (
    PeakMeasurement,
    ThresholdConfig,
    ThresholdSet,
    analyze,
    compute_thresholds,
    crossing_threshold,
    measure_peak,
    quantize,
    sampled_smoothing_window,
    unimodal_threshold,
)

from .oracles import crossing_scan

FULL = IntensityBasis.full(8)


def exact(mean, width, basis=FULL):
    return measure_peak(GaussianEffect(mean, width, basis))


def two_gauss_image(m1, s1, m2, s2, seed, n=128):
    rng = np.random.default_rng(seed)
    v = np.concatenate([rng.normal(m1, s1, n * n // 2), rng.normal(m2, s2, n * n - n * n // 2)])
    return GrayImage(np.clip(np.rint(v), 0, 255).astype(int).reshape(n, n))


CORPUS = [
    (50, 12, 150, 12),
    (60, 15, 180, 20),
    (40, 10, 120, 25),
    (80, 20, 200, 10),
    (30, 8, 100, 8),
    (100, 30, 200, 15),
    (20, 5, 235, 5),
    (70, 6, 110, 6),
    (128, 40, 230, 8),
]


def test_case1_unimodal():
    basis = IntensityBasis((63, 100, 141, 155))
    m = exact(100, 35, basis)
    assert unimodal_threshold(m, basis) == 100
    tset = compute_thresholds(case1_image())
    assert tset.thresholds == (100,)
    assert tset.provenance[0]["kind"] == "unimodal-argmax"


def test_unimodal_single_state_and_tie():
    basis = IntensityBasis((42,))
    assert unimodal_threshold(PeakMeasurement(0, [1.0]), basis) == 42
    basis = IntensityBasis((10, 20, 30))
    assert unimodal_threshold(PeakMeasurement(0, [0.4, 0.2, 0.4]), basis) == 10


def test_symmetric_crossing_is_midpoint():
    assert crossing_threshold(exact(50, 20), exact(150, 20), FULL, (50, 150)) == 100


def test_unequal_width_crossing_matches_scan():
    t = crossing_threshold(exact(40, 10), exact(120, 30), FULL, (40, 120))
    assert t == crossing_scan(40, 10, 120, 30, 40, 120)


def test_empty_overlap():
    basis = IntensityBasis((0, 1, 2, 3))
    a = PeakMeasurement(0, [0.5, 0.5, 0, 0])
    b = PeakMeasurement(1, [0, 0, 0.5, 0.5])
    with pytest.raises(EmptyOverlap):
        crossing_threshold(a, b, basis, (0, 3))


def test_valley_fallback():
    # Narrow, distant peaks: no intensity carries mass under both.
    img = GrayImage(np.array([[10] * 8 + [240] * 8] * 4))
    peaks = PeakSet((Peak(10, 0.5, 10, 120), Peak(240, 0.5, 120, 240)))
    tset = compute_thresholds(img, ThresholdConfig(peak_override=peaks, basis="full"))
    assert tset.thresholds == (120,)
    assert tset.provenance[0]["kind"] == "valley-fallback"


def test_lena_four_thresholds(lena):
    tset = compute_thresholds(lena)
    assert len(tset) == 4
    # Golden from this implementation (exact mode, default settings).
    assert tset.thresholds == (75, 116, 141, 182)
    assert [p["peaks"] for p in tset.provenance] == [[0, 1], [1, 2], [2, 3], [3, 4]]


def test_constant_image_is_degenerate():
    a = analyze(GrayImage(np.full((3, 5), 77)))
    assert a.degenerate
    assert a.thresholds.thresholds == (77,)
    out = quantize(GrayImage(np.full((3, 5), 77)), a.thresholds, "binary-extremes")
    assert np.all(out.pixels == 0)


def test_quantize_rules():
    img = GrayImage(np.array([[10, 20], [200, 210]]))
    assert quantize(img, [100]).pixels.tolist() == [[15, 15], [205, 205]]
    c1 = case1_image()
    out = quantize(c1, ThresholdSet((100,)), "binary-extremes")
    mapping = dict(zip(c1.flat().tolist(), out.flat().tolist()))
    assert mapping == {63: 0, 100: 0, 141: 255, 155: 255}
    pv = quantize(GrayImage(np.array([[1, 1, 2, 9, 9, 8]])), [5], "peak-value")
    assert pv.pixels.tolist() == [[1, 1, 1, 9, 9, 9]]
    with pytest.raises(ValueError):
        quantize(img, [10, 20], "binary-extremes")
    with pytest.raises(ValueError):
        quantize(img, [10], "median")


def test_quantize_no_thresholds():
    img = GrayImage(np.array([[3, 5]]))
    assert quantize(img, []).pixels.tolist() == [[4, 4]]


@given(
    st.lists(st.integers(0, 255), min_size=4, max_size=40),
    st.lists(st.integers(0, 254), min_size=1, max_size=4, unique=True),
    st.sampled_from(["binary-extremes", "peak-value"]),
)
def test_quantize_idempotent(px, ts, rule):
    ts = sorted(ts)
    if rule == "binary-extremes":
        ts = ts[:1]
    img = GrayImage(np.array([px]))
    once = quantize(img, ts, rule)
    assert quantize(once, ts, rule) == once


def test_threshold_json_round_trip():
    tset = ThresholdSet((3, 9), ({"kind": "crossing", "peaks": [0, 1]},) * 2, "sampled", 500, 4)
    doc = json.loads(tset.to_json())
    assert doc["thresholds"][0] == {"value": 3, "provenance": {"kind": "crossing", "peaks": [0, 1]}}
    assert doc["shots"] == 500 and doc["seed"] == 4
    assert ThresholdSet.from_json(tset.to_json()) == tset
    assert ThresholdSet.from_dict({"thresholds": [5, 7]}).thresholds == (5, 7)


def test_threshold_set_validation():
    with pytest.raises(ValueError):
        ThresholdSet((5, 5))
    with pytest.raises(ValueError):
        ThresholdSet((9, 2))


def test_config_validation():
    with pytest.raises(ValueError):
        ThresholdConfig(mode="sampled")
    with pytest.raises(ValueError):
        ThresholdConfig(mode="noisy")


def test_exact_mode_is_pure():
    img = two_gauss_image(60, 15, 180, 20, seed=1)
    assert compute_thresholds(img) == compute_thresholds(img)


def test_sampled_reproducible():
    img = two_gauss_image(60, 15, 180, 20, seed=1)
    cfg = ThresholdConfig(mode="sampled", shots=2000, seed=9)
    assert compute_thresholds(img, cfg) == compute_thresholds(img, cfg)


def test_smoothing_window():
    assert sampled_smoothing_window(46, 60) == 23
    assert sampled_smoothing_window(20, 100) == 9
    assert sampled_smoothing_window(3, 3) == 1


@pytest.mark.parametrize("case", CORPUS)
def test_sampled_close_to_exact(case):
    img = two_gauss_image(*case, seed=CORPUS.index(case))
    ref = compute_thresholds(img).thresholds
    for seed in range(3):
        got = compute_thresholds(img, ThresholdConfig(mode="sampled", shots=10_000, seed=seed))
        assert len(got) == len(ref)
        assert all(abs(a - b) <= 2 for a, b in zip(got.thresholds, ref))


def test_binary_mode_uses_dominant_peak():
    img = two_gauss_image(60, 10, 180, 25, seed=0)
    a = analyze(img, ThresholdConfig(binary=True))
    heights = [compute_histogram(img).counts[m] for m in a.peaks.means]
    assert a.thresholds.provenance[0]["peaks"] == [int(np.argmax(heights))]
    assert len(a.thresholds) == 1


def test_curves_shape(lena):
    a = analyze(lena)
    curves = a.curves()
    assert curves.shape == (256, 6)
    assert np.allclose(curves[:, 1:].sum(axis=0), 1)


@settings(max_examples=40)
@given(
    st.integers(10, 120),
    st.integers(20, 100),
    st.floats(4, 40),
    st.floats(4, 40),
    st.integers(1, 8),
)
def test_monotone_in_peak_mean(m1, gap, d1, d2, step):
    m2 = min(m1 + gap, 250)
    t = crossing_threshold(exact(m1, d1), exact(m2, d2), FULL, (m1, m2 - 1))
    m2b = min(m2 + step, 255)
    up = crossing_threshold(exact(m1, d1), exact(m2b, d2), FULL, (m1, m2b - 1))
    assert up >= t
