"""
End-to-end robustness benchmark: train a probe per variant, then sweep corruptions.

Both variants are built from the same seed, so they share projection weights,
positional embedding and PostLayerNorm; they differ only in PreLayerNorm.
Translation changes the view (resize then crop), so it gets its own probe
trained on the unshifted crop.
"""

import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel

from .. import __version__
from ..core.config import EmbeddingSettings, ProbeSettings
from ..core.errors import InvalidArgumentError
from ..core.reports import Mode, SweepResult
from ..corruptions import IDENTITY_FACTORS, CorruptionKind, CorruptionSpec, create_corruption
from ..embedding.early_stage import Variant, config_from_settings
from .linear_probe import evaluate, extract_feature_matrix, save_probe, split_indices, train_probe
from .sweep import run_sweep


class ProbeSummary(BaseModel):
    variant: str
    view: str
    train_accuracy: float
    val_accuracy: float
    test_accuracy: float
    final_loss: float
    epochs: int
    seed: int


class BenchResult(BaseModel):
    seed: int
    mode: Mode
    tool_version: str
    dataset_checksum: Optional[str] = None
    num_train: int
    num_val: int
    num_test: int
    probes: List[ProbeSummary]
    sweeps: List[SweepResult]


def default_factors(settings: ProbeSettings) -> Dict[CorruptionKind, List[float]]:
    return {
        CorruptionKind.CONTRAST: list(settings.contrast_factors),
        CorruptionKind.BRIGHTNESS: list(settings.brightness_factors),
        CorruptionKind.GAMMA: list(settings.gamma_factors),
        CorruptionKind.ROTATION: list(settings.rotation_degrees),
        CorruptionKind.TRANSLATION: list(settings.translation_shifts),
    }


def _view_of(kind: CorruptionKind) -> str:
    return "crop" if kind is CorruptionKind.TRANSLATION else "full"


def run_benchmark(
    images: Sequence,
    labels: Sequence[int],
    variants: Sequence[Variant],
    kinds: Sequence[CorruptionKind],
    embedding: EmbeddingSettings,
    settings: ProbeSettings,
    mode: Mode = Mode.PIL_EXACT,
    seed: int = 7,
    factors: Optional[Dict[CorruptionKind, List[float]]] = None,
    dataset_checksum: Optional[str] = None,
    workers: int = 1,
    probe_dir: Optional[Path] = None,
) -> BenchResult:
    """Train, evaluate and sweep; wall-clock timings go to the log only."""
    kinds = [CorruptionKind(k) for k in kinds]
    factors = factors or default_factors(settings)
    for kind in kinds:
        if IDENTITY_FACTORS[kind] not in factors[kind]:
            raise InvalidArgumentError(f"{kind.value} factors must include {IDENTITY_FACTORS[kind]}")
    if CorruptionKind.ROTATION in kinds and any(abs(d) > settings.max_rotation for d in factors[CorruptionKind.ROTATION]):
        raise InvalidArgumentError(f"rotation is limited to +/-{settings.max_rotation} degrees")

    labels = np.asarray(labels)
    train_idx, val_idx, test_idx = split_indices(len(images), settings.split, seed)
    train_imgs = [images[i] for i in train_idx]
    val_imgs = [images[i] for i in val_idx]
    test_imgs = [images[i] for i in test_idx]
    num_classes = int(labels.max()) + 1

    probes: List[ProbeSummary] = []
    sweeps: List[SweepResult] = []
    for variant in variants:
        cfg = config_from_settings(variant, seed, embedding)
        views = sorted({_view_of(k) for k in kinds})
        trained = {}
        for view in views:
            started = time.perf_counter()
            if view == "crop":
                identity = create_corruption(CorruptionSpec(
                    kind=CorruptionKind.TRANSLATION, factor=0, mode=mode,
                    template_size=settings.translation_template, crop_size=embedding.image_size,
                ))
            else:
                identity = None

            def prepared(batch):
                return [identity.apply(img) for img in batch] if identity else list(batch)

            train_x = extract_feature_matrix(prepared(train_imgs), cfg, settings.reduction, workers)
            probe = train_probe(
                train_x, labels[train_idx],
                lr=settings.lr, epochs=settings.epochs, l2=settings.l2,
                seed=seed, num_classes=num_classes, reduction=settings.reduction,
            )
            summary = ProbeSummary(
                variant=variant.value,
                view=view,
                train_accuracy=evaluate(probe, train_x, labels[train_idx]),
                val_accuracy=evaluate(probe, extract_feature_matrix(prepared(val_imgs), cfg, settings.reduction, workers), labels[val_idx]),
                test_accuracy=evaluate(probe, extract_feature_matrix(prepared(test_imgs), cfg, settings.reduction, workers), labels[test_idx]),
                final_loss=probe.final_loss,
                epochs=probe.epochs,
                seed=seed,
            )
            probes.append(summary)
            trained[view] = probe
            if probe_dir is not None:
                save_probe(probe, Path(probe_dir) / f"{variant.value}_{view}.probe")
            logger.info(
                f"Probe {variant.value}/{view}: train {summary.train_accuracy:.3f} "
                f"val {summary.val_accuracy:.3f} test {summary.test_accuracy:.3f} "
                f"({time.perf_counter() - started:.2f}s)"
            )

        for kind in kinds:
            started = time.perf_counter()
            sweeps.append(run_sweep(
                test_imgs, labels[test_idx], trained[_view_of(kind)], cfg, kind, factors[kind],
                mode=mode, seed=seed,
                template_size=settings.translation_template, crop_size=embedding.image_size,
                dataset_checksum=dataset_checksum, workers=workers,
            ))
            logger.info(f"Sweep {variant.value}/{kind.value} took {time.perf_counter() - started:.2f}s")

    return BenchResult(
        seed=seed,
        mode=Mode(mode),
        tool_version=__version__,
        dataset_checksum=dataset_checksum,
        num_train=len(train_idx),
        num_val=len(val_idx),
        num_test=len(test_idx),
        probes=probes,
        sweeps=sweeps,
    )
