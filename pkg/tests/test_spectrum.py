import numpy as np
import pytest

from bcdi.spectrum import (Spectrum, apply_poly, apply_poly_adjoint,
                           continuous_spectrum, harmonics_spectrum)
from bcdi.transfer import dense_matrix, geometry_for_ratio


def test_harmonics_five_order_comb():
    spec = harmonics_spectrum([3, 5, 7, 9, 11], [0.2, 0.4, 0.4, 0.3, 0.2])
    assert np.allclose(spec.ratios, [1, 11 / 9, 11 / 7, 11 / 5, 11 / 3])
    # weight follows its order: 11 -> 0.2, 9 -> 0.3, 7 -> 0.4, 5 -> 0.4, 3 -> 0.2
    assert np.allclose(spec.weights, [0.2, 0.3, 0.4, 0.4, 0.2])


def test_harmonics_trivial_and_octave():
    spec = harmonics_spectrum([1], [1.0])
    assert np.allclose(spec.ratios, [1.0]) and np.allclose(spec.weights, [1.0])
    spec = harmonics_spectrum([1, 2], [0.5, 0.5])
    assert np.allclose(spec.ratios, [1.0, 2.0])
    assert np.allclose(spec.weights, [0.5, 0.5])


def test_harmonics_validation():
    with pytest.raises(ValueError):
        harmonics_spectrum([3, 5], [1.0])
    with pytest.raises(ValueError):
        harmonics_spectrum([0, 5], [0.5, 0.5])


def test_continuous_broadband_recipe():
    spec = continuous_spectrum(2.5, 0.8, 384)
    assert len(spec.ratios) == 384
    assert np.isclose(spec.ratios[0], 1.0)
    assert np.isclose(spec.ratios[-1], 3.5 / 1.5)
    assert np.isclose(spec.weights.max(), 1.0)
    # peak weight sits at the center wavelength 2.5, i.e. ratio 2.5/1.5
    peak = spec.ratios[np.argmax(spec.weights)]
    assert abs(peak - 2.5 / 1.5) < 0.01


def test_continuous_narrow_is_symmetric():
    spec = continuous_spectrum(2.0, 0.01, 3)
    assert np.isclose(spec.weights[0], spec.weights[2])
    assert spec.weights[1] == 1.0


def test_continuous_two_points_equal_weights():
    spec = continuous_spectrum(2.0, 0.5, 2)
    assert np.allclose(spec.weights, [1.0, 1.0])


def test_continuous_validation():
    with pytest.raises(ValueError):
        continuous_spectrum(2.5, 0.0, 10)
    with pytest.raises(ValueError):
        continuous_spectrum(2.5, 2.5, 10)
    with pytest.raises(ValueError):
        continuous_spectrum(2.5, 0.8, 1)


def test_spectrum_renormalizes_unanchored_ratios():
    spec = Spectrum(np.array([2.0, 3.0]), np.array([1.0, 1.0]))
    assert np.allclose(spec.ratios, [1.0, 1.5])


def test_spectrum_validation():
    with pytest.raises(ValueError):
        Spectrum(np.array([]), np.array([]))
    with pytest.raises(ValueError):
        Spectrum(np.array([1.0, 1.0]), np.array([1.0, 1.0]))  # not strictly increasing
    with pytest.raises(ValueError):
        Spectrum(np.array([1.0, 2.0]), np.array([0.0, 0.0]))  # all-zero weights
    with pytest.raises(ValueError):
        Spectrum(np.array([1.0, 2.0]), np.array([1.0, -0.1]))


def test_channel_merging_on_small_grid():
    spec = continuous_spectrum(2.5, 0.8, 384).bind((16, 16))
    merged = spec.channels()
    assert 2 <= len(merged) < 384
    assert np.isclose(sum(w for _, w in merged), spec.total_weight)


def test_apply_poly_identity_spectrum():
    spec = Spectrum(np.array([1.0]), np.array([1.0])).bind((8, 8))
    rng = np.random.default_rng(0)
    x = rng.standard_normal((8, 8))
    assert np.allclose(apply_poly(x, spec), x)
    assert np.allclose(apply_poly_adjoint(x, spec), x)


def test_apply_poly_matches_dense_combination():
    spec = Spectrum(np.array([1.0, 2.0]), np.array([0.5, 0.5])).bind((8, 8))
    mat = dense_matrix(geometry_for_ratio(2, (8, 8)))
    rng = np.random.default_rng(1)
    x = rng.standard_normal((8, 8))
    expected = 0.5 * x + 0.5 * (mat @ x.ravel()).reshape(8, 8)
    got = apply_poly(x, spec)
    assert np.linalg.norm(got - expected) <= 1e-10 * np.linalg.norm(x)


def test_apply_poly_linearity_and_homogeneity():
    spec = harmonics_spectrum([1, 2, 3], [0.5, 0.3, 0.2]).bind((16, 16))
    rng = np.random.default_rng(2)
    x = rng.standard_normal((16, 16))
    assert np.array_equal(apply_poly(2.0 * x, spec), 2.0 * apply_poly(x, spec))
    scaled = spec.scaled(3.0).bind((16, 16))
    assert np.allclose(apply_poly(x, scaled), 3.0 * apply_poly(x, spec))


def test_apply_poly_adjoint_identity():
    spec = harmonics_spectrum([2, 3, 5], [0.3, 0.5, 0.2]).bind((16, 16))
    rng = np.random.default_rng(3)
    for _ in range(5):
        x = rng.standard_normal((16, 16))
        z = rng.standard_normal((16, 16))
        lhs = np.sum(apply_poly(x, spec) * z)
        rhs = np.sum(x * apply_poly_adjoint(z, spec))
        assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(x) * np.linalg.norm(z)


def test_adjoint_single_active_channel_reduces_to_identity_channel():
    spec = Spectrum(np.array([1.0, 2.0]), np.array([0.7, 0.0])).bind((8, 8))
    rng = np.random.default_rng(4)
    z = rng.standard_normal((8, 8))
    assert np.allclose(apply_poly_adjoint(z, spec), 0.7 * z)


def test_channel_order_independence():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((16, 16))
    a = Spectrum(np.array([1.0, 1.5, 2.0]), np.array([0.2, 0.3, 0.5])).bind((16, 16))
    # construction sorts ratios, so feed a permuted channel list
    b = Spectrum(np.array([2.0, 1.0, 1.5]), np.array([0.5, 0.2, 0.3])).bind((16, 16))
    assert np.linalg.norm(apply_poly(x, a) - apply_poly(x, b)) <= 1e-12


def test_unbound_spectrum_raises():
    spec = harmonics_spectrum([1, 2], [0.5, 0.5])
    with pytest.raises(ValueError):
        apply_poly(np.zeros((8, 8)), spec)
