"""
Resize, crop, translation protocol and rotation.

Resampling is bilinear with half-pixel-centred sampling: destination pixel i
of an axis of length ``out`` reads source coordinate (i + 0.5) * in / out - 0.5,
clamped to the source. Rotation fills uncovered pixels by edge replication.
"""

import math

import numpy as np

from ..core.errors import InvalidArgumentError, OutOfRangeError
from .base_corruption import BaseCorruption, CorruptionKind, register
from .image_io import Image, finalize


def _bilinear_sample(values: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Sample an H x W x 3 array at broadcastable float coordinates, clamped to the edges."""
    h, w, _ = values.shape
    ys = np.clip(ys, 0.0, h - 1)
    xs = np.clip(xs, 0.0, w - 1)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[..., None]
    wx = (xs - x0)[..., None]
    top = values[y0, x0] * (1.0 - wx) + values[y0, x1] * wx
    bottom = values[y1, x0] * (1.0 - wx) + values[y1, x1] * wx
    return top * (1.0 - wy) + bottom * wy


def _source_coords(out_len: int, in_len: int) -> np.ndarray:
    return (np.arange(out_len, dtype=np.float64) + 0.5) * in_len / out_len - 0.5


def resize(img: Image, width: int, height: int) -> Image:
    """Bilinear resize; the output keeps the input's mode."""
    if width < 1 or height < 1:
        raise InvalidArgumentError(f"resize target must be positive, got {width}x{height}")
    if (width, height) == img.size:
        return img
    ys = _source_coords(height, img.height)[:, None]
    xs = _source_coords(width, img.width)[None, :]
    return finalize(_bilinear_sample(img.as_float(), ys, xs), img.mode)


def resize_short_side(img: Image, size: int) -> Image:
    """Scale so the shorter side equals ``size``; the long side is rounded to nearest."""
    if size < 1:
        raise InvalidArgumentError(f"short side must be positive, got {size}")
    short, long_ = sorted((img.height, img.width))
    other = int(long_ * size / short + 0.5)
    if img.height <= img.width:
        return resize(img, other, size)
    return resize(img, size, other)


def crop_window(img: Image, size: int, shift: int = 0) -> Image:
    """size x size window whose centre is the image centre moved by (+shift, +shift)."""
    top = (img.height - size) // 2 + shift
    left = (img.width - size) // 2 + shift
    if size < 1 or top < 0 or left < 0 or top + size > img.height or left + size > img.width:
        raise OutOfRangeError(
            f"{size}x{size} window at (left={left}, top={top}) exceeds {img.width}x{img.height} image"
        )
    return Image(img.pixels[top:top + size, left:left + size])


def center_crop(img: Image, size: int) -> Image:
    return crop_window(img, size, 0)


def translate_crop(img: Image, s: int, template_size: int = 256, crop_size: int = 224) -> Image:
    """Resize to the template short side, then crop a window shifted by +s both ways.

    Windows that leave the template raise instead of padding.
    """
    if s < 0 or s != int(s):
        raise InvalidArgumentError(f"shift must be a nonnegative integer, got {s}")
    if crop_size > template_size:
        raise InvalidArgumentError(f"crop {crop_size} is larger than template {template_size}")
    template = img if min(img.size) == template_size else resize_short_side(img, template_size)
    return crop_window(template, crop_size, int(s))


def rotate(img: Image, degrees: float) -> Image:
    """Counter-clockwise rotation about the image centre, same output size."""
    if degrees == 0:
        return img
    theta = math.radians(degrees)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    cy = (img.height - 1) / 2.0
    cx = (img.width - 1) / 2.0
    dy = np.arange(img.height, dtype=np.float64)[:, None] - cy
    dx = np.arange(img.width, dtype=np.float64)[None, :] - cx
    xs = cx + cos_t * dx - sin_t * dy
    ys = cy + sin_t * dx + cos_t * dy
    return finalize(_bilinear_sample(img.as_float(), ys, xs), img.mode)


@register
class TranslationCorruption(BaseCorruption):
    kind = CorruptionKind.TRANSLATION

    def apply(self, img: Image) -> Image:
        spec = self.spec
        return translate_crop(img.to_mode(spec.mode), int(spec.factor), spec.template_size, spec.crop_size)


@register
class RotationCorruption(BaseCorruption):
    kind = CorruptionKind.ROTATION

    def apply(self, img: Image) -> Image:
        return rotate(img.to_mode(self.spec.mode), self.spec.factor)
