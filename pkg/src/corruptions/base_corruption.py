"""
Base corruption class and the registry that maps a kind to its implementation.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, Type

from ..core.errors import InvalidArgumentError
from ..core.reports import Mode


class CorruptionKind(str, Enum):
    CONTRAST = "contrast"
    BRIGHTNESS = "brightness"
    GAMMA = "gamma"
    TRANSLATION = "translation"
    ROTATION = "rotation"


IDENTITY_FACTORS: Dict[CorruptionKind, float] = {
    CorruptionKind.CONTRAST: 1.0,
    CorruptionKind.BRIGHTNESS: 1.0,
    CorruptionKind.GAMMA: 1.0,
    CorruptionKind.TRANSLATION: 0.0,
    CorruptionKind.ROTATION: 0.0,
}


@dataclass(frozen=True)
class CorruptionSpec:
    """What to apply: enhancement factor, gamma, shift s in pixels, or degrees."""
    kind: CorruptionKind
    factor: float
    mode: Mode = Mode.PIL_EXACT

    # Contrast degenerate: grayscale mean (reference behaviour) or per-channel mean
    degenerate: str = "grayscale"

    # Translation protocol
    template_size: int = 256
    crop_size: int = 224

    def __post_init__(self):
        object.__setattr__(self, "kind", CorruptionKind(self.kind))
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "factor", float(self.factor))
        if self.kind in (CorruptionKind.CONTRAST, CorruptionKind.BRIGHTNESS) and self.factor < 0:
            raise InvalidArgumentError(f"{self.kind.value} factor must be >= 0, got {self.factor}")
        if self.kind is CorruptionKind.GAMMA and self.factor <= 0:
            raise InvalidArgumentError(f"gamma must be > 0, got {self.factor}")
        if self.kind is CorruptionKind.TRANSLATION and (self.factor < 0 or self.factor != int(self.factor)):
            raise InvalidArgumentError(f"translation shift must be a nonnegative integer, got {self.factor}")
        if self.degenerate not in ("grayscale", "channel"):
            raise InvalidArgumentError(f"unknown degenerate '{self.degenerate}'")

    @property
    def is_identity(self) -> bool:
        return self.factor == IDENTITY_FACTORS[self.kind]

    def with_factor(self, factor: float) -> "CorruptionSpec":
        return replace(self, factor=float(factor))


class BaseCorruption(ABC):
    """Base class for all corruptions."""

    kind: CorruptionKind

    def __init__(self, spec: CorruptionSpec):
        if spec.kind is not self.kind:
            raise InvalidArgumentError(f"{self.__class__.__name__} cannot apply {spec.kind.value}")
        self.spec = spec
        self.name = self.__class__.__name__

    @abstractmethod
    def apply(self, img):
        """Return the corrupted image. Must be implemented by subclasses."""
        pass

    def __call__(self, img):
        return self.apply(img)


_REGISTRY: Dict[CorruptionKind, Type[BaseCorruption]] = {}


def register(cls: Type[BaseCorruption]) -> Type[BaseCorruption]:
    _REGISTRY[cls.kind] = cls
    return cls


def create_corruption(spec: CorruptionSpec) -> BaseCorruption:
    """Create the corruption that implements ``spec.kind``."""
    try:
        corruption_cls = _REGISTRY[spec.kind]
    except KeyError:
        raise InvalidArgumentError(f"no corruption registered for {spec.kind.value}")
    return corruption_cls(spec)
