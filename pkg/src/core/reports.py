"""
Report models and their on-disk form.

Every report is a pydantic model; ``write_json`` serializes with sorted keys
and fixed indentation so that reruns produce byte-identical files.
"""

import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from .errors import DatasetIOError


class Mode(str, Enum):
    """Idealized: real-valued, unclamped. PilExact: u8, rounded half-to-even and clamped."""
    IDEALIZED = "idealized"
    PIL_EXACT = "pil"


class EcpeReport(BaseModel):
    variant: str
    corruption_factor: float
    num_images: int
    ecpe_value: float
    per_image_values: List[float]
    seed: int
    mode: Mode
    tool_version: str
    dataset_checksum: Optional[str] = None

    @model_validator(mode="after")
    def _check_invariants(self):
        if self.ecpe_value < 0:
            raise ValueError(f"ECPE must be nonnegative, got {self.ecpe_value}")
        if len(self.per_image_values) != self.num_images:
            raise ValueError("per_image_values length differs from num_images")
        total = math.fsum(self.per_image_values)
        if abs(total - self.ecpe_value) > 1e-9 * max(abs(total), 1e-300):
            raise ValueError(f"ecpe_value {self.ecpe_value} is not the sum of per-image values {total}")
        return self


class EcpeCurve(BaseModel):
    """One variant's ECPE over a list of contrast factors."""
    variant: str
    factors: List[float]
    values: List[float]
    relative_spread: float
    strictly_decreasing: bool
    constant: bool
    asymptotic_factor: float
    asymptotic_ratio: float


class EcpeSummary(BaseModel):
    mode: Mode
    seed: int
    tool_version: str
    dataset_checksum: Optional[str] = None
    curves: List[EcpeCurve]
    reports: List[EcpeReport]


class SweepResult(BaseModel):
    corruption: str
    factors: List[float]
    accuracy: List[float]
    variant: str
    mode: Mode
    num_test: int
    seed: int
    clean_accuracy: float
    tool_version: str
    dataset_checksum: Optional[str] = None

    @model_validator(mode="after")
    def _check_invariants(self):
        if len(self.accuracy) != len(self.factors):
            raise ValueError("accuracy and factors differ in length")
        if any(not 0.0 <= a <= 1.0 for a in self.accuracy):
            raise ValueError("accuracy values must lie in [0, 1]")
        return self

    def drop_at(self, factor: float) -> float:
        """Accuracy lost relative to the clean baseline at one factor."""
        return self.clean_accuracy - self.accuracy[self.factors.index(factor)]

    def mean_drop(self, factors: List[float]) -> float:
        return sum(self.drop_at(f) for f in factors) / len(factors)


class ManifestEntry(BaseModel):
    path: str
    label: int
    seed: int


class Manifest(BaseModel):
    checksum_algorithm: str = "sha256 over raw RGB bytes (row-major, 8-bit) of every image in entry order"
    checksum: str
    num_classes: int
    image_size: int
    background: str
    seed: int
    tool_version: str
    entries: List[ManifestEntry]

    @model_validator(mode="after")
    def _check_labels(self):
        bad = [e.label for e in self.entries if not 0 <= e.label < self.num_classes]
        if bad:
            raise ValueError(f"labels outside [0, {self.num_classes}): {sorted(set(bad))}")
        return self


class PropertyResult(BaseModel):
    name: str
    variant: str
    passed: bool
    measured: Dict[str, Any] = Field(default_factory=dict)
    failing_seeds: List[int] = Field(default_factory=list)


class InvarianceReport(BaseModel):
    variant: str
    seed: int
    tool_version: str
    all_passed: bool
    properties: List[PropertyResult]


def to_json(model: BaseModel) -> str:
    return json.dumps(model.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"


def write_json(model: BaseModel, path) -> Path:
    """Write a report as deterministic JSON."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(to_json(model), encoding="utf-8")
    except OSError as e:
        raise DatasetIOError(path, f"cannot write report ({e.strerror})") from e
    return path


def read_json(model_cls, path):
    path = Path(path)
    if not path.exists():
        raise DatasetIOError(path, "missing file")
    try:
        return model_cls.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise DatasetIOError(path, f"cannot read ({e.strerror})") from e
