"""
Image corruptions: enhancement blends, gamma, translation protocol and rotation.

Importing the package registers every corruption with ``create_corruption``.
"""

from .base_corruption import (
    BaseCorruption,
    CorruptionKind,
    CorruptionSpec,
    IDENTITY_FACTORS,
    create_corruption,
)
from . import enhance, geometry  # noqa: F401  (registration)
from .image_io import Image, read_image, write_image

__all__ = [
    "BaseCorruption",
    "CorruptionKind",
    "CorruptionSpec",
    "IDENTITY_FACTORS",
    "Image",
    "create_corruption",
    "read_image",
    "write_image",
]
