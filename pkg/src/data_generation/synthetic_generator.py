"""
Deterministic synthetic shape dataset.

Each image holds one hard-edged shape (circle, square or triangle) in a
mid-range colour on a grey background. Shapes stay inside the region that
every window of the translation sweep keeps, so shifting never cuts them.
A class is a (shape, colour) pair; labels are assigned round-robin so class
counts differ by at most one.
"""

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np
from loguru import logger

from .. import __version__
from ..core.errors import DatasetIOError, InvalidArgumentError
from ..core.reports import Manifest, ManifestEntry, read_json, write_json
from ..core.tensor import derive_seeds, make_rng
from ..corruptions.image_io import Image, read_image, write_image

SHAPES = ("circle", "square", "triangle")
PALETTE = (
    (192, 64, 64),
    (64, 192, 64),
    (64, 64, 192),
    (192, 192, 64),
    (192, 64, 192),
    (64, 192, 192),
)
BACKGROUNDS = ("flat", "noise")
FLAT_GREY = 128
NOISE_RANGE = (96, 160)
MANIFEST_NAME = "manifest.json"

# Shape box bounds as fractions of the image side. The sweep template is 4/3 of
# the image, the centre crop is one image wide and shifts reach 1/6 of it, so
# [1/4, 7/8) of the image is visible in every shifted window.
SAFE_START = 0.25
SAFE_END = 0.875


@dataclass(frozen=True)
class SynthSpec:
    num_images: int = 900
    image_size: int = 96
    num_classes: int = 9
    seed: int = 7
    background: str = "noise"
    patch_size: int = 16

    def __post_init__(self):
        if self.num_classes < 2:
            raise InvalidArgumentError(f"need at least 2 classes, got {self.num_classes}")
        if self.num_classes > len(SHAPES) and (
            self.num_classes % len(SHAPES) or self.num_classes // len(SHAPES) > len(PALETTE)
        ):
            raise InvalidArgumentError(
                f"num_classes must be <= {len(SHAPES)} or a multiple of {len(SHAPES)} "
                f"up to {len(SHAPES) * len(PALETTE)}, got {self.num_classes}"
            )
        if self.num_images < self.num_classes:
            raise InvalidArgumentError(
                f"cannot balance {self.num_classes} classes over {self.num_images} images"
            )
        if self.image_size % self.patch_size or self.image_size < 4 * self.patch_size:
            raise InvalidArgumentError(
                f"image size {self.image_size} must be a multiple of {self.patch_size} and at least 4 patches wide"
            )
        if self.background not in BACKGROUNDS:
            raise InvalidArgumentError(f"background must be one of {BACKGROUNDS}, got '{self.background}'")

    def class_of(self, label: int) -> Tuple[str, int]:
        """(shape, palette index) for a label; palette index -1 means a per-image colour."""
        shape = SHAPES[label % len(SHAPES)]
        if self.num_classes <= len(SHAPES):
            return shape, -1
        return shape, label // len(SHAPES)


def _shape_mask(shape: str, size: int, top: int, left: int, extent: int) -> np.ndarray:
    """Boolean mask of a shape inside its extent x extent box, sampled at pixel centres."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64) + 0.5
    cy, cx = top + extent / 2.0, left + extent / 2.0
    if shape == "circle":
        return (yy - cy) ** 2 + (xx - cx) ** 2 <= (extent / 2.0) ** 2
    inside_box = (yy >= top) & (yy <= top + extent) & (xx >= left) & (xx <= left + extent)
    if shape == "square":
        return inside_box
    # apex at the top centre, base along the bottom edge
    return inside_box & (np.abs(xx - cx) <= (yy - top) / 2.0)


def safe_region(size: int) -> Tuple[int, int]:
    """[lo, hi) pixel range, per axis, that shape boxes are drawn in."""
    return int(np.ceil(SAFE_START * size)), int(SAFE_END * size)


def render_image(spec: SynthSpec, label: int, seed: int) -> Image:
    rng = make_rng(seed)
    size = spec.image_size
    if spec.background == "noise":
        grey = rng.integers(NOISE_RANGE[0], NOISE_RANGE[1] + 1, size=(size, size))
    else:
        grey = np.full((size, size), FLAT_GREY)
    pixels = np.repeat(grey[:, :, None], 3, axis=2).astype(np.uint8)

    shape, colour_index = spec.class_of(label)
    if colour_index < 0:
        colour_index = int(rng.integers(0, len(PALETTE)))
    extent = int(rng.integers(round(0.46 * size), size // 2 + 1))
    lo, hi = safe_region(size)
    top = int(rng.integers(lo, hi - extent + 1))
    left = int(rng.integers(lo, hi - extent + 1))
    pixels[_shape_mask(shape, size, top, left, extent)] = PALETTE[colour_index]
    return Image(pixels)


def dataset_checksum(images: Sequence[Image]) -> str:
    """sha256 over raw row-major 8-bit RGB bytes of every image, in order."""
    digest = hashlib.sha256()
    for img in images:
        digest.update(np.ascontiguousarray(img.to_mode("pil").pixels).tobytes())
    return digest.hexdigest()


def generate(spec: SynthSpec, workers: int = 1) -> Tuple[List[Image], Manifest]:
    """Render every image of a spec; results are independent of ``workers``."""
    labels = [i % spec.num_classes for i in range(spec.num_images)]
    seeds = derive_seeds(spec.seed, spec.num_images)
    logger.info(f"Generating {spec.num_images} synthetic images ({spec.num_classes} classes, seed={spec.seed})")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            images = list(pool.map(lambda args: render_image(spec, *args), zip(labels, seeds)))
    else:
        images = [render_image(spec, label, seed) for label, seed in zip(labels, seeds)]

    manifest = Manifest(
        checksum=dataset_checksum(images),
        num_classes=spec.num_classes,
        image_size=spec.image_size,
        background=spec.background,
        seed=spec.seed,
        tool_version=__version__,
        entries=[
            ManifestEntry(path=f"img_{i:05d}.ppm", label=label, seed=seed)
            for i, (label, seed) in enumerate(zip(labels, seeds))
        ],
    )
    return images, manifest


def save_dataset(images: Sequence[Image], manifest: Manifest, directory) -> Path:
    """Write images as PPM plus the JSON manifest; returns the manifest path."""
    directory = Path(directory)
    for img, entry in zip(images, manifest.entries):
        write_image(img, directory / entry.path)
    path = write_json(manifest, directory / MANIFEST_NAME)
    logger.info(f"Saved {len(manifest.entries)} images to {directory}")
    return path


def load_dataset(directory, verify: bool = True) -> Tuple[List[Image], Manifest]:
    """Read a dataset directory; the checksum is recomputed and compared."""
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    manifest = read_json(Manifest, manifest_path)
    images = [read_image(directory / entry.path) for entry in manifest.entries]
    if verify:
        checksum = dataset_checksum(images)
        if checksum != manifest.checksum:
            raise DatasetIOError(manifest_path, f"checksum mismatch (manifest {manifest.checksum[:12]}, images {checksum[:12]})")
    return images, manifest


def manifest_mismatches(manifest: Manifest, spec: SynthSpec) -> List[str]:
    """Fields where a stored manifest differs from the requested spec."""
    expected = {
        "seed": spec.seed,
        "num_images": spec.num_images,
        "image_size": spec.image_size,
        "num_classes": spec.num_classes,
        "background": spec.background,
    }
    stored = {
        "seed": manifest.seed,
        "num_images": len(manifest.entries),
        "image_size": manifest.image_size,
        "num_classes": manifest.num_classes,
        "background": manifest.background,
    }
    return [f"{key}={stored[key]} (requested {value})" for key, value in expected.items() if stored[key] != value]


def ensure_dataset(directory, spec: SynthSpec, workers: int = 1) -> Tuple[List[Image], Manifest]:
    """Load the dataset in ``directory``, generating it first when no manifest exists.

    An existing dataset built from a different spec is rejected rather than reused.
    """
    directory = Path(directory)
    if not (directory / MANIFEST_NAME).exists():
        images, manifest = generate(spec, workers)
        save_dataset(images, manifest, directory)
        return images, manifest
    images, manifest = load_dataset(directory)
    mismatches = manifest_mismatches(manifest, spec)
    if mismatches:
        raise InvalidArgumentError(
            f"dataset in {directory} was generated with {', '.join(mismatches)}; "
            f"use another --data directory or matching flags"
        )
    return images, manifest


def labels_of(manifest: Manifest) -> np.ndarray:
    return np.array([entry.label for entry in manifest.entries], dtype=np.intp)
