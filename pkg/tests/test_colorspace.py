import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from skimage.color import rgb2lab

from colorhomography.colorspace import (
    D65,
    RGI_MATRIX,
    RGI_MATRIX_INV,
    dehomogenize,
    delta_e,
    lab_to_xyz,
    linear_rgb_to_xyz,
    rgb_to_chromaticity,
    rgb_to_rgi,
    srgb_encode,
    srgb_to_xyz,
    xyz_to_lab,
    xyz_to_linear_rgb,
)
from colorhomography.errors import InputError, NumericWarning

positive = st.floats(min_value=1e-6, max_value=1e3, allow_nan=False)
rgb_triples = st.tuples(positive, positive, positive)


def test_rgi_examples():
    np.testing.assert_array_equal(rgb_to_rgi([1, 2, 3]), [1, 2, 6])
    np.testing.assert_array_equal(rgb_to_rgi([1, 0, 0]), [1, 0, 1])
    with pytest.raises(InputError, match="black pixel"):
        rgb_to_rgi([0, 0, 0])


def test_chromaticity_examples():
    np.testing.assert_allclose(rgb_to_chromaticity([1, 2, 5]), [0.125, 0.25])
    np.testing.assert_allclose(rgb_to_chromaticity([2, 4, 10]), [0.125, 0.25])
    for k in (1e-3, 0.7, 42.0):
        np.testing.assert_allclose(rgb_to_chromaticity([k, k, k]), [1 / 3, 1 / 3], rtol=1e-15)
    with pytest.raises(InputError, match="black pixel"):
        rgb_to_chromaticity([0, 0, 0])


def test_dehomogenize_examples():
    np.testing.assert_allclose(dehomogenize([1, 2, 4]), [0.25, 0.5])
    np.testing.assert_allclose(dehomogenize([0.25, 0.5, 1]), [0.25, 0.5])
    with pytest.raises(InputError, match="point at infinity"):
        dehomogenize([1, 1, 0])


def test_rgi_matrix_is_unimodular():
    assert np.linalg.det(RGI_MATRIX) == pytest.approx(1.0)
    np.testing.assert_allclose(RGI_MATRIX_INV @ RGI_MATRIX, np.eye(3), atol=1e-14)


@given(rgb_triples)
def test_rgi_and_chromaticity_agree(rgb):
    np.testing.assert_array_equal(dehomogenize(rgb_to_rgi(rgb)), rgb_to_chromaticity(rgb))


@given(rgb_triples, st.floats(min_value=1e-3, max_value=1e3))
def test_chromaticity_is_scale_invariant(rgb, k):
    rgb = np.array(rgb)
    np.testing.assert_allclose(rgb_to_chromaticity(k * rgb), rgb_to_chromaticity(rgb), atol=1e-12)


def test_srgb_to_xyz_examples():
    # Expected white from the published sRGB/D65 constants; skimage is the
    # independent oracle for the converter as a whole (see acceptance).
    np.testing.assert_allclose(srgb_to_xyz([255, 255, 255]), [0.9505, 1.0, 1.0890], atol=1e-3)
    np.testing.assert_array_equal(srgb_to_xyz([0, 0, 0]), [0, 0, 0])
    y_gray = ((128 / 255 + 0.055) / 1.055) ** 2.4
    assert srgb_to_xyz([128, 128, 128])[1] == pytest.approx(0.2159, abs=1e-3)
    assert srgb_to_xyz([128, 128, 128])[1] == pytest.approx(y_gray, abs=1e-6)


@pytest.mark.parametrize("bad", [[256, 0, 0], [-1, 0, 0], [10.5, 0, 0]])
def test_srgb_to_xyz_rejects_invalid(bad):
    with pytest.raises(InputError, match="invalid 8-bit value"):
        srgb_to_xyz(bad)


def test_xyz_to_lab_examples():
    white = np.array(D65.xyz)
    np.testing.assert_allclose(xyz_to_lab(white), [100, 0, 0], atol=1e-12)
    np.testing.assert_allclose(xyz_to_lab([0, 0, 0]), [0, 0, 0], atol=1e-12)
    expected_l = 116 * 0.18 ** (1 / 3) - 16
    assert expected_l == pytest.approx(49.50, abs=0.05)
    assert xyz_to_lab(0.18 * white)[0] == pytest.approx(expected_l, abs=1e-12)


def test_xyz_to_lab_matches_skimage_on_grays():
    for v in (0, 1, 10, 128, 254, 255):
        ours = xyz_to_lab(srgb_to_xyz([v, v, v]))
        ref = rgb2lab(np.full((1, 1, 3), v / 255.0))[0, 0]
        assert delta_e(ours, ref) < 0.01


def test_negative_xyz_is_clamped_with_warning():
    with pytest.warns(NumericWarning):
        lab = xyz_to_lab([-0.1, 0.5, 0.5])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        np.testing.assert_allclose(lab, xyz_to_lab([0.0, 0.5, 0.5]))


def test_lab_round_trip(rng):
    xyz = rng.uniform(0.01, 0.9, (1000, 3)) * np.array(D65.xyz)
    np.testing.assert_allclose(lab_to_xyz(xyz_to_lab(xyz)), xyz, rtol=1e-9)


def test_gray_round_trip_through_inverse_path():
    v = np.arange(256)
    grays = np.stack([v, v, v], axis=1)
    back = srgb_encode(xyz_to_linear_rgb(lab_to_xyz(xyz_to_lab(srgb_to_xyz(grays)))))
    assert np.abs(back - grays / 255.0).max() < 0.5 / 255


def test_delta_e_examples(rng):
    assert delta_e([50, 0, 0], [50, 0, 0]) == 0
    assert delta_e([50, 0, 0], [50, 3, 4]) == 5
    x, y = rng.normal(size=3) * 50, rng.normal(size=3) * 50
    assert delta_e(x, y) == pytest.approx(math.sqrt(sum((a - b) ** 2 for a, b in zip(x, y))), rel=1e-14)


def test_linear_white_is_reference_white():
    np.testing.assert_allclose(linear_rgb_to_xyz([1, 1, 1]), D65.xyz, atol=1e-6)


@settings(max_examples=50)
@given(st.lists(st.floats(-100, 100), min_size=9, max_size=9))
def test_delta_e_metric_axioms(v):
    x, y, z = np.reshape(v, (3, 3))
    assert delta_e(x, y) >= 0
    assert delta_e(x, y) == delta_e(y, x)
    assert delta_e(x, z) <= delta_e(x, y) + delta_e(y, z) + 1e-9
    assert delta_e(x, x) == 0
