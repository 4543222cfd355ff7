"""
Robustness sweeps: accuracy of a trained probe on corrupted test images.
"""

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from .. import __version__
from ..core.errors import DatasetIOError, InvalidArgumentError
from ..core.reports import Mode, SweepResult
from ..corruptions import IDENTITY_FACTORS, CorruptionKind, CorruptionSpec, create_corruption
from ..embedding.early_stage import EarlyStageConfig
from .linear_probe import ProbeModel, classify, extract_features


def sweep_predictions(images: Sequence, probe: ProbeModel, cfg: EarlyStageConfig, spec: CorruptionSpec,
                      workers: int = 1) -> np.ndarray:
    """Predicted class of every image after one corruption."""
    corruption = create_corruption(spec)

    def features_of(img):
        return extract_features(corruption.apply(img), cfg, probe.feature_reduction)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(features_of, images))
    else:
        rows = [features_of(img) for img in images]
    return classify(probe, np.vstack(rows))


def run_sweep(
    images: Sequence,
    labels: Sequence[int],
    probe: ProbeModel,
    cfg: EarlyStageConfig,
    kind,
    factors: Sequence[float],
    mode: Mode = Mode.PIL_EXACT,
    seed: int = 0,
    template_size: int = 256,
    crop_size: int = 224,
    dataset_checksum: Optional[str] = None,
    workers: int = 1,
) -> SweepResult:
    """Accuracy per factor; the identity factor supplies the clean baseline."""
    kind = CorruptionKind(kind)
    factors = [float(f) for f in factors]
    identity = IDENTITY_FACTORS[kind]
    if identity not in factors:
        raise InvalidArgumentError(f"{kind.value} sweep needs the identity factor {identity}, got {factors}")
    labels = np.asarray(labels)
    if len(images) == 0 or labels.shape != (len(images),):
        raise InvalidArgumentError("sweep needs a nonempty test set with one label per image")

    base = CorruptionSpec(kind=kind, factor=identity, mode=mode, template_size=template_size, crop_size=crop_size)
    accuracy: List[float] = []
    for factor in factors:
        predictions = sweep_predictions(images, probe, cfg, base.with_factor(factor), workers)
        accuracy.append(float(np.mean(predictions == labels)))
        logger.debug(f"{cfg.variant.value} {kind.value}={factor}: accuracy {accuracy[-1]:.4f}")

    result = SweepResult(
        corruption=kind.value,
        factors=factors,
        accuracy=accuracy,
        variant=cfg.variant.value,
        mode=Mode(mode),
        num_test=len(images),
        seed=seed,
        clean_accuracy=accuracy[factors.index(identity)],
        tool_version=__version__,
        dataset_checksum=dataset_checksum,
    )
    logger.info(f"Sweep {cfg.variant.value}/{kind.value} ({Mode(mode).value}): {dict(zip(factors, accuracy))}")
    return result


def sweeps_to_frame(results: Sequence[SweepResult]) -> pd.DataFrame:
    """One row per (sweep, factor)."""
    rows = []
    for result in results:
        for factor, acc in zip(result.factors, result.accuracy):
            rows.append({
                "corruption": result.corruption,
                "variant": result.variant,
                "mode": result.mode.value,
                "factor": factor,
                "accuracy": acc,
                "drop": result.clean_accuracy - acc,
                "num_test": result.num_test,
                "seed": result.seed,
            })
    return pd.DataFrame(rows, columns=["corruption", "variant", "mode", "factor", "accuracy", "drop", "num_test", "seed"])


def write_sweep_csv(results: Sequence[SweepResult], path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        sweeps_to_frame(results).to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
    except OSError as e:
        raise DatasetIOError(path, f"cannot write CSV ({e.strerror})") from e
    return path
