import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import softmax

from umthresh.exceptions import BasisMismatch, EmptyBasis
from umthresh.povm import (
    AmplitudeMap,
    DiagonalEffect,
    GaussianEffect,
    IntensityBasis,
    apply_effect,
    build_uniform_state,
    complete_effects,
    effect_sum_check,
    effect_sum_deviation,
)

CASE1 = IntensityBasis((63, 100, 141, 155))


def test_uniform_state():
    s = build_uniform_state(CASE1)
    assert s.amplitudes.tolist() == [1, 1, 1, 1]
    assert not s.normalized
    assert build_uniform_state(IntensityBasis((9,))).amplitudes.tolist() == [1]
    full = build_uniform_state(IntensityBasis.full(8))
    assert len(set(full.amplitudes.tolist())) == 1 and full.amplitudes.size == 256


def test_empty_basis():
    with pytest.raises(EmptyBasis):
        IntensityBasis(())


def test_basis_encoding():
    assert CASE1.qubit_count == 2
    assert [CASE1.index_of(v) for v in (63, 100, 141, 155)] == [0, 1, 2, 3]
    assert CASE1.intensity_of(2) == 141
    assert IntensityBasis((1, 2, 3)).qubit_count == 2
    assert IntensityBasis((5,)).qubit_count == 0
    with pytest.raises(ValueError):
        IntensityBasis((3, 3))
    with pytest.raises(KeyError):
        CASE1.index_of(64)


def test_case1_amplitudes():
    out = apply_effect(GaussianEffect(100, 35, CASE1), build_uniform_state(CASE1))
    assert np.allclose(out.amplitudes, [0.447, 0.774, 0.387, 0.223], atol=0.01)
    assert out.normalized
    assert int(np.argmax(out.amplitudes)) == 1


def test_case1_uses_true_intensities():
    # Direct evaluation at the listed intensities, not at indices 0..3.
    w = np.exp(-((np.array([63, 100, 141, 155]) - 100) ** 2) / (2 * 35**2))
    out = apply_effect(GaussianEffect(100, 35, CASE1), build_uniform_state(CASE1))
    assert np.allclose(out.amplitudes, w / np.linalg.norm(w), atol=1e-12)


def test_flat_limit():
    out = apply_effect(GaussianEffect(100, 1e6, CASE1), build_uniform_state(CASE1))
    assert np.allclose(out.amplitudes, 0.5, atol=1e-3)


def test_sharp_limit():
    out = apply_effect(GaussianEffect(100, 1, CASE1), build_uniform_state(CASE1))
    assert out.amplitudes[1] >= 0.9999


def test_delta_limit_monotone():
    prev = 0.0
    for d in (50, 20, 5, 1):
        p = apply_effect(GaussianEffect(100, d, CASE1), build_uniform_state(CASE1)).probabilities()
        assert p[1] >= prev
        prev = p[1]
    assert prev > 0.999


def test_basis_mismatch():
    with pytest.raises(BasisMismatch):
        apply_effect(GaussianEffect(100, 5, CASE1), build_uniform_state(IntensityBasis((1, 2))))


def test_effect_validation():
    with pytest.raises(ValueError):
        GaussianEffect(100, 0, CASE1)
    with pytest.raises(ValueError):
        GaussianEffect(256, 3, CASE1)


def test_weights_include_prefactor():
    e = GaussianEffect(100, 35, CASE1)
    assert math.isclose(e.weights()[1], 1 / math.sqrt(2 * math.pi * 35**2))


def test_single_effect_is_not_partition():
    assert effect_sum_check([GaussianEffect(100, 35, CASE1)]) > 0


def test_discrete_partition_of_unity():
    basis = IntensityBasis.full(8)
    effects = [GaussianEffect(m, 3.0, basis) for m in range(256)]
    dev = effect_sum_deviation(effects)
    # Away from the range ends the Gaussian sum is normalized to high accuracy.
    assert dev[20:236].max() <= 1e-6
    assert effect_sum_check(complete_effects(effects)) <= 1e-12


def test_empty_column_deviation_is_one():
    basis = IntensityBasis((0, 1, 2))
    effects = [DiagonalEffect(basis, [1.0, 0.0, 0.5]), DiagonalEffect(basis, [0.0, 0.0, 0.5])]
    assert effect_sum_deviation(effects)[1] == 1.0
    assert effect_sum_check(effects) == 1.0


@given(
    st.lists(st.integers(0, 200), min_size=2, max_size=12, unique=True),
    st.floats(0, 200),
    st.floats(0.5, 200),
    st.integers(0, 55),
    st.randoms(use_true_random=False),
)
def test_unit_norm_and_relabeling(values, mean, width, shift, rnd):
    values = sorted(values)
    amps = np.array([rnd.uniform(0.1, 3.0) for _ in values])
    basis = IntensityBasis(tuple(values))
    out = apply_effect(GaussianEffect(mean, width, basis), AmplitudeMap(basis, amps))
    assert out.normalized
    assert abs(np.sum(out.amplitudes**2) - 1) <= 1e-9
    assert np.all(out.amplitudes >= 0)
    # Stable reference in log space.
    logp = 2 * (np.log(amps) - (np.array(values) - mean) ** 2 / (2 * width**2))
    assert np.allclose(out.amplitudes, np.sqrt(softmax(logp)), atol=1e-9)
    # Relabeling every intensity (and the mean) by the same offset changes nothing.
    moved = IntensityBasis(tuple(v + shift for v in values))
    out2 = apply_effect(GaussianEffect(mean + shift, width, moved), AmplitudeMap(moved, amps))
    assert np.allclose(out.amplitudes, out2.amplitudes, atol=1e-12)
