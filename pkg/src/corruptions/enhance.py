"""
Brightness, contrast and gamma enhancement.

Brightness and contrast blend an image with a degenerate image:
out = degenerate + factor * (in - degenerate). Brightness uses the zero image,
contrast a uniform image at the mean luminance. PilExact mode rounds
half-to-even and clamps to [0, 255]; Idealized mode keeps the exact affine map.
"""

from typing import Optional

import numpy as np
from pydantic import BaseModel

from ..core.errors import InvalidArgumentError
from ..core.reports import Mode
from ..core.tensor import frobenius
from .base_corruption import BaseCorruption, CorruptionKind, CorruptionSpec, create_corruption, register
from .image_io import Image, finalize

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def luminance(pixels: np.ndarray) -> np.ndarray:
    """L = 0.299 R + 0.587 G + 0.114 B per pixel."""
    pixels = np.asarray(pixels, dtype=np.float64)
    r, g, b = LUMA_WEIGHTS
    return r * pixels[..., 0] + g * pixels[..., 1] + b * pixels[..., 2]


def degenerate_value(img: Image, spec: CorruptionSpec) -> np.ndarray:
    """Blend anchor broadcastable to the image: scalar or one value per channel."""
    if spec.kind is CorruptionKind.BRIGHTNESS:
        return np.zeros(())
    exact = spec.mode is Mode.PIL_EXACT
    if spec.degenerate == "channel":
        means = img.as_float().reshape(-1, 3).mean(axis=0)
        return np.rint(means) if exact else means
    if exact:
        return np.rint(np.rint(luminance(img.pixels)).mean())
    return np.asarray(luminance(img.pixels).mean())


def _blend(img: Image, spec: CorruptionSpec) -> np.ndarray:
    """Unrounded, unclamped blend values."""
    degenerate = degenerate_value(img, spec)
    return degenerate + spec.factor * (img.as_float() - degenerate)


def enhance(img: Image, spec: CorruptionSpec) -> Image:
    """Brightness or contrast enhancement."""
    if spec.kind not in (CorruptionKind.CONTRAST, CorruptionKind.BRIGHTNESS):
        raise InvalidArgumentError(f"enhance applies contrast or brightness, not {spec.kind.value}")
    if spec.factor < 0:
        raise InvalidArgumentError(f"enhancement factor must be >= 0, got {spec.factor}")
    if spec.factor == 1.0:
        return img.to_mode(spec.mode)
    return finalize(_blend(img, spec), spec.mode)


def gamma(img: Image, g: float, mode: Optional[Mode] = None) -> Image:
    """out = 255 * (in / 255) ** g."""
    if not g > 0:
        raise InvalidArgumentError(f"gamma must be > 0, got {g}")
    mode = Mode(mode) if mode is not None else img.mode
    if g == 1.0:
        return img.to_mode(mode)
    values = img.as_float()
    if np.any(values < 0):
        raise InvalidArgumentError("gamma is undefined for negative pixel values")
    return finalize(255.0 * (values / 255.0) ** g, mode)


def saturation_fraction(img: Image, spec: CorruptionSpec) -> float:
    """Share of channel values an exact enhancement would push outside [0, 255]."""
    if spec.kind is CorruptionKind.GAMMA:
        return 0.0
    values = _blend(img, spec)
    return float(np.mean((values < 0.0) | (values > 255.0)))


class AffineFit(BaseModel):
    """patchify(corrupt(img)) ~ a * patchify(img) + b, least squares."""
    a: float
    b: float
    relative_residual: float


def affine_fit_residual(img: Image, spec: CorruptionSpec, cfg) -> AffineFit:
    """How far a corruption is from the aX + b model in patch space."""
    from ..embedding.early_stage import patchify

    x = np.asarray(patchify(img, cfg)).reshape(-1)
    y = np.asarray(patchify(create_corruption(spec).apply(img), cfg)).reshape(-1)
    design = np.stack([x, np.ones_like(x)], axis=1)
    (a, b), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = frobenius(y - (a * x + b)) / max(frobenius(y), 1e-300)
    return AffineFit(a=float(a), b=float(b), relative_residual=float(residual))


@register
class ContrastCorruption(BaseCorruption):
    kind = CorruptionKind.CONTRAST

    def apply(self, img: Image) -> Image:
        return enhance(img, self.spec)


@register
class BrightnessCorruption(BaseCorruption):
    kind = CorruptionKind.BRIGHTNESS

    def apply(self, img: Image) -> Image:
        return enhance(img, self.spec)


@register
class GammaCorruption(BaseCorruption):
    kind = CorruptionKind.GAMMA

    def apply(self, img: Image) -> Image:
        return gamma(img, self.spec.factor, self.spec.mode)
