"""
RGB raster type and PPM/PNG encode/decode.

PPM is P6 with maxval 255. PNG goes through pypng and is always read as
8-bit RGB.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import png
from loguru import logger

from ..core.errors import DatasetIOError, InvalidArgumentError, ShapeError
from ..core.reports import Mode
from ..core.tensor import freeze


@dataclass(frozen=True)
class Image:
    """H x W x 3 pixels: uint8 in PilExact mode, float64 in Idealized mode."""
    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise ShapeError(f"image must be H x W x 3, got {pixels.shape}")
        if pixels.dtype == np.uint8:
            pixels = pixels.copy()
        else:
            pixels = pixels.astype(np.float64, copy=True)
            if not np.all(np.isfinite(pixels)):
                raise InvalidArgumentError("idealized image contains non-finite values")
        object.__setattr__(self, "pixels", freeze(pixels))

    @property
    def mode(self) -> Mode:
        return Mode.PIL_EXACT if self.pixels.dtype == np.uint8 else Mode.IDEALIZED

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def size(self) -> Tuple[int, int]:
        return self.width, self.height

    def as_float(self) -> np.ndarray:
        return self.pixels.astype(np.float64)

    def to_mode(self, mode: Mode) -> "Image":
        """Same picture in another mode; Idealized to PilExact rounds and clamps."""
        mode = Mode(mode)
        if mode is self.mode:
            return self
        return finalize(self.pixels, mode)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return self.pixels.dtype == other.pixels.dtype and np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.pixels.dtype.str, self.pixels.shape, self.pixels.tobytes()))


def quantize(values: np.ndarray) -> np.ndarray:
    """Round half-to-even and clamp to [0, 255]."""
    return np.clip(np.rint(values), 0, 255).astype(np.uint8)


def finalize(values: np.ndarray, mode: Mode) -> Image:
    """Wrap computed values as an image of the requested mode."""
    if Mode(mode) is Mode.PIL_EXACT:
        return Image(quantize(values))
    return Image(np.asarray(values, dtype=np.float64))


def uniform_image(height: int, width: int, value: Union[float, np.ndarray], mode: Mode = Mode.IDEALIZED) -> Image:
    values = np.broadcast_to(np.asarray(value, dtype=np.float64), (height, width, 3))
    return finalize(values, mode)


def _ppm_header(data: bytes, path) -> Tuple[Tuple[int, int, int], int]:
    """Parse 'P6 <w> <h> <maxval>' with comments; return fields and data offset."""
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise DatasetIOError(path, "truncated PPM header")
        tokens.append(data[start:pos])
    if tokens[0] != b"P6":
        raise DatasetIOError(path, f"not a binary PPM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise DatasetIOError(path, "malformed PPM header")
    if maxval != 255:
        raise DatasetIOError(path, f"unsupported PPM maxval {maxval}")
    # exactly one whitespace byte separates the header from the raster
    return (width, height, maxval), pos + 1


def decode_ppm(data: bytes, path="<bytes>") -> Image:
    (width, height, _), offset = _ppm_header(data, path)
    expected = width * height * 3
    raster = data[offset:offset + expected]
    if len(raster) != expected:
        raise DatasetIOError(path, f"PPM raster has {len(raster)} bytes, expected {expected}")
    return Image(np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3))


def encode_ppm(img: Image) -> bytes:
    pixels = img.to_mode(Mode.PIL_EXACT).pixels
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(pixels).tobytes()


def read_image(path) -> Image:
    """Read a PPM (P6) or PNG file as a PilExact image."""
    path = Path(path)
    if not path.exists():
        raise DatasetIOError(path, "missing image")
    try:
        if path.suffix.lower() == ".png":
            width, height, rows, _ = png.Reader(filename=str(path)).asRGB8()
            pixels = np.vstack([np.frombuffer(bytes(row), dtype=np.uint8) for row in rows])
            return Image(pixels.reshape(height, width, 3))
        return decode_ppm(path.read_bytes(), path)
    except png.Error as e:
        raise DatasetIOError(path, f"unreadable PNG ({e})") from e
    except OSError as e:
        raise DatasetIOError(path, f"unreadable image ({e.strerror})") from e


def write_image(img: Image, path) -> Path:
    """Write PPM or PNG by suffix; Idealized images are rounded and clamped first."""
    path = Path(path)
    if img.mode is Mode.IDEALIZED:
        logger.debug(f"Quantizing idealized image before writing {path.name}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if path.suffix.lower() == ".png":
            pixels = img.to_mode(Mode.PIL_EXACT).pixels
            writer = png.Writer(width=img.width, height=img.height, greyscale=False, bitdepth=8)
            with open(path, "wb") as f:
                writer.write(f, pixels.reshape(img.height, img.width * 3).tolist())
        else:
            path.write_bytes(encode_ppm(img))
    except OSError as e:
        raise DatasetIOError(path, f"cannot write image ({e.strerror})") from e
    return path
