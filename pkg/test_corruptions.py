#!/usr/bin/env python3
"""
Tests for enhancement blends, gamma, the translation protocol and rotation.
"""

from pathlib import Path

import numpy as np
import pytest

from src.core.errors import InvalidArgumentError, OutOfRangeError
from src.core.reports import Mode
from src.core.tensor import mat_random_uniform
from src.corruptions import CorruptionKind, CorruptionSpec, create_corruption
from src.corruptions.enhance import affine_fit_residual, degenerate_value, enhance, gamma, saturation_fraction
from src.corruptions.geometry import center_crop, crop_window, resize, resize_short_side, rotate, translate_crop
from src.corruptions.image_io import Image, encode_ppm, read_image, uniform_image
from src.embedding.early_stage import Variant, build_early_stage, patchify

GOLDEN = Path(__file__).parent / "fixtures" / "golden"


def _u8(seed: int, h: int = 32, w: int = 32) -> Image:
    values = np.asarray(mat_random_uniform(h * w, 3, 0.0, 256.0, seed))
    return Image(np.floor(values).astype(np.uint8).reshape(h, w, 3))


def _spec(kind, factor, mode=Mode.PIL_EXACT, **kwargs):
    return CorruptionSpec(kind=kind, factor=factor, mode=mode, **kwargs)


@pytest.mark.parametrize("kind", [CorruptionKind.CONTRAST, CorruptionKind.BRIGHTNESS, CorruptionKind.GAMMA])
def test_identity_factor_is_bit_exact(kind):
    img = _u8(1)
    out = create_corruption(_spec(kind, 1.0)).apply(img)
    assert out == img
    assert encode_ppm(out) == encode_ppm(img)


def test_contrast_factor_zero_is_uniform_grey():
    img = _u8(2)
    out = enhance(img, _spec(CorruptionKind.CONTRAST, 0.0))
    grey = degenerate_value(img, _spec(CorruptionKind.CONTRAST, 0.0))
    assert np.all(out.pixels == grey)


def test_contrast_degenerate_is_rounded_grayscale_mean():
    pixels = np.array([[[10, 20, 30], [200, 100, 50]]], dtype=np.uint8)
    spec = _spec(CorruptionKind.CONTRAST, 2.0)
    # L = round(18.15) = 18 and round(124.2) = 124; mean 71
    assert degenerate_value(Image(pixels), spec) == 71
    channel = _spec(CorruptionKind.CONTRAST, 2.0, degenerate="channel")
    np.testing.assert_array_equal(degenerate_value(Image(pixels), channel), [105, 60, 40])


def test_brightness_five_saturates_above_51():
    strip = np.repeat(np.arange(256, dtype=np.uint8)[None, :, None], 3, axis=2)
    out = enhance(Image(strip), _spec(CorruptionKind.BRIGHTNESS, 5.0)).pixels[0, :, 0]
    np.testing.assert_array_equal(out[:52], np.minimum(np.arange(52) * 5, 255))
    assert out[51] == 255
    assert np.all(out[52:] == 255)
    assert np.all(out[:51] < 255)


def test_pil_exact_output_is_clamped_u8():
    out = enhance(_u8(3), _spec(CorruptionKind.CONTRAST, 3.0))
    assert out.pixels.dtype == np.uint8
    assert out.pixels.min() >= 0 and out.pixels.max() <= 255


def test_negative_factor_rejected():
    with pytest.raises(InvalidArgumentError):
        _spec(CorruptionKind.CONTRAST, -0.5)
    with pytest.raises(InvalidArgumentError):
        gamma(_u8(4), 0.0)
    with pytest.raises(InvalidArgumentError):
        gamma(Image(-np.ones((2, 2, 3))), 2.0)


def test_idealized_enhance_composes_affinely():
    img = _u8(5).to_mode(Mode.IDEALIZED)
    brightness_twice = enhance(enhance(img, _spec(CorruptionKind.BRIGHTNESS, 1.5, Mode.IDEALIZED)),
                               _spec(CorruptionKind.BRIGHTNESS, 2.0, Mode.IDEALIZED))
    np.testing.assert_allclose(brightness_twice.pixels, 3.0 * img.pixels, rtol=1e-12)

    first = enhance(img, _spec(CorruptionKind.CONTRAST, 1.5, Mode.IDEALIZED))
    # contrast keeps the mean luminance, so the second blend uses the same anchor
    second = enhance(first, _spec(CorruptionKind.CONTRAST, 2.0, Mode.IDEALIZED))
    deg = degenerate_value(img, _spec(CorruptionKind.CONTRAST, 1.0, Mode.IDEALIZED))
    np.testing.assert_allclose(second.pixels, deg + 3.0 * (img.pixels - deg), rtol=1e-12, atol=1e-10)


def test_idealized_contrast_commutes_with_patchify():
    cfg = build_early_stage(Variant.VIT, 32, 16, 64, seed=3, center_projection=False)
    img = _u8(6).to_mode(Mode.IDEALIZED)
    f = 2.5
    spec = _spec(CorruptionKind.CONTRAST, f, Mode.IDEALIZED)
    deg = float(degenerate_value(img, spec))
    lhs = patchify(enhance(img, spec), cfg)
    rhs = f * patchify(img, cfg) + patchify(uniform_image(32, 32, (1.0 - f) * deg), cfg)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


def test_gamma_examples():
    pixels = np.array([[[0, 128, 255]]], dtype=np.uint8)
    out = gamma(Image(pixels), 2.0).pixels
    np.testing.assert_array_equal(out, [[[0, 64, 255]]])
    assert gamma(Image(pixels), 1.0) == Image(pixels)


@pytest.mark.parametrize("kind", ["contrast", "brightness", "gamma"])
@pytest.mark.parametrize("factor", ["0", "0.5", "1", "2", "5"])
def test_golden_fixtures(kind, factor):
    if kind == "gamma" and factor == "0":
        pytest.skip("gamma must be positive")
    source = read_image(GOLDEN / "input.ppm")
    expected = (GOLDEN / f"{kind}_{factor}.ppm").read_bytes()
    out = create_corruption(_spec(kind, float(factor))).apply(source)
    assert encode_ppm(out) == expected


def test_saturation_fraction():
    strip = np.repeat(np.arange(256, dtype=np.uint8)[None, :, None], 3, axis=2)
    assert saturation_fraction(Image(strip), _spec(CorruptionKind.BRIGHTNESS, 5.0)) == pytest.approx(204 / 256)
    assert saturation_fraction(Image(strip), _spec(CorruptionKind.BRIGHTNESS, 1.0)) == 0.0


def test_contrast_is_closer_to_affine_than_brightness():
    img = _u8(7)
    cfg = build_early_stage(Variant.VIT, 32, 16, 64, seed=1)
    contrast = affine_fit_residual(img, _spec(CorruptionKind.CONTRAST, 1.2), cfg)
    brightness = affine_fit_residual(img, _spec(CorruptionKind.BRIGHTNESS, 3.0), cfg)
    assert contrast.relative_residual < brightness.relative_residual
    assert 1.0 < contrast.a <= 1.2 + 1e-9


def test_resize_short_side_dimensions():
    img = _u8(8, h=20, w=30)
    out = resize_short_side(img, 10)
    assert (out.height, out.width) == (10, 15)
    tall = resize_short_side(_u8(9, h=30, w=20), 10)
    assert (tall.height, tall.width) == (15, 10)


def test_resize_of_uniform_image_is_uniform():
    out = resize(uniform_image(7, 9, 100.0, Mode.PIL_EXACT), 13, 5)
    assert np.all(out.pixels == 100)


def test_translate_zero_is_center_crop():
    img = _u8(10, h=40, w=60)
    template = resize_short_side(img, 32)
    assert translate_crop(img, 0, template_size=32, crop_size=24) == center_crop(template, 24)


def test_translation_window_arithmetic():
    template = _u8(11, h=256, w=340)
    out = translate_crop(template, 16)
    top, left = (256 - 224) // 2 + 16, (340 - 224) // 2 + 16
    assert (left, top) == (74, 32)
    np.testing.assert_array_equal(out.pixels, template.pixels[top:top + 224, left:left + 224])


def test_translation_beyond_template_raises():
    template = _u8(12, h=256, w=256)
    assert translate_crop(template, 16).size == (224, 224)
    with pytest.raises(OutOfRangeError):
        translate_crop(template, 17)
    with pytest.raises(OutOfRangeError):
        crop_window(template, 300)
    with pytest.raises(InvalidArgumentError):
        translate_crop(template, -1)


def test_rotate_zero_is_identity():
    img = _u8(13)
    assert rotate(img, 0.0) is img


def test_rotate_full_turn_idealized():
    img = _u8(14).to_mode(Mode.IDEALIZED)
    np.testing.assert_allclose(rotate(img, 360.0).pixels, img.pixels, atol=1e-6)


def test_rotate_quarter_turn_matches_index_permutation():
    pixels = np.zeros((8, 8, 3), dtype=np.uint8)
    pixels[:, :4] = 40
    pixels[:, 4:] = 200
    pixels[:2, :4] = 120
    out = rotate(Image(pixels), 90.0)
    np.testing.assert_array_equal(out.pixels, np.rot90(pixels))


def test_rotation_keeps_size_and_mode():
    img = _u8(15, h=16, w=24)
    out = create_corruption(_spec(CorruptionKind.ROTATION, 30.0)).apply(img)
    assert out.size == img.size
    assert out.mode is Mode.PIL_EXACT
