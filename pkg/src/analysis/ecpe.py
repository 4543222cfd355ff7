"""
Effective contribution of positional embedding (ECPE).

For one image, Z = sum_{n,d} z[n, d] with z the early-stage output; ECPE sums
ReLU(dZ/dE_pos) over all N x D entries and over every image of a dataset.
The analytic gradient is checked against central finite differences.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np
from loguru import logger

from .. import __version__
from ..core.errors import InvalidArgumentError
from ..core.reports import EcpeReport, Mode
from ..core.tensor import Matrix, freeze
from ..corruptions.base_corruption import CorruptionKind, CorruptionSpec, create_corruption
from ..embedding.early_stage import EarlyStageConfig, early_stage_forward, outer_input, patchify
from ..embedding.layer_norm import layer_norm_backward

FD_STEP_RANGE = (1e-7, 1e-3)


def grad_epos_analytic(x: Matrix, cfg: EarlyStageConfig) -> Matrix:
    """dZ/dE_pos by reverse mode through PostLayerNorm.

    E_pos enters as an additive term of the PostLayerNorm input in both
    variants, so its gradient is the input gradient of that LayerNorm with an
    all-ones upstream gradient.
    """
    v = outer_input(x, cfg)
    return layer_norm_backward(v, np.ones_like(v), cfg.post_ln)


def grad_epos_fd(x: Matrix, cfg: EarlyStageConfig, h: float = 1e-5) -> Matrix:
    """Central-difference estimate of dZ/dE_pos, one element at a time.

    Perturbing E_pos[n, d] only changes row n of z, so each difference is
    taken over that row; the other rows cancel exactly.
    """
    lo, hi = FD_STEP_RANGE
    if not lo <= h <= hi:
        raise InvalidArgumentError(f"finite-difference step must be in [{lo}, {hi}], got {h}")
    base = np.array(cfg.pos_embed)
    rows, cols = base.shape
    grad = np.zeros_like(base)
    for n in range(rows):
        for d in range(cols):
            plus = base.copy()
            plus[n, d] += h
            minus = base.copy()
            minus[n, d] -= h
            z_plus = early_stage_forward(x, cfg.with_pos_embed(plus))[n]
            z_minus = early_stage_forward(x, cfg.with_pos_embed(minus))[n]
            grad[n, d] = np.sum(z_plus - z_minus) / (2.0 * h)
    return freeze(grad)


@dataclass(frozen=True)
class GradientCheckResult:
    max_rel_error: float
    max_abs_error: float
    checked: int
    failures: int

    @property
    def passed(self) -> bool:
        return self.failures == 0


def gradient_check(
    x: Matrix,
    cfg: EarlyStageConfig,
    h: float = 1e-5,
    rtol: float = 1e-5,
    atol: float = 1e-9,
    mask: float = 1e-8,
) -> GradientCheckResult:
    """Compare analytic and finite-difference gradients.

    Elements with |analytic| <= mask are skipped. An element fails when
    |analytic - fd| > rtol * |analytic| + atol; atol is the round-off floor of
    a central difference.
    """
    analytic = grad_epos_analytic(x, cfg)
    numeric = grad_epos_fd(x, cfg, h)
    checked = np.abs(analytic) > mask
    abs_err = np.abs(analytic - numeric)
    rel_err = abs_err[checked] / np.abs(analytic[checked])
    failures = int(np.count_nonzero(abs_err[checked] > rtol * np.abs(analytic[checked]) + atol))
    return GradientCheckResult(
        max_rel_error=float(rel_err.max()) if rel_err.size else 0.0,
        max_abs_error=float(abs_err.max()),
        checked=int(np.count_nonzero(checked)),
        failures=failures,
    )


def relu_mass(grad: Matrix) -> float:
    """Elementwise ReLU, then the sum over all N x D entries."""
    return float(np.maximum(np.asarray(grad), 0.0).sum())


def pairwise_sum(values: Sequence[float]) -> float:
    """Fixed-shape pairwise reduction; result depends only on the value order."""
    items = [float(v) for v in values]
    if not items:
        return 0.0
    while len(items) > 1:
        paired = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            paired.append(items[-1])
        items = paired
    return items[0]


def image_ecpe(img, factor: float, cfg: EarlyStageConfig, mode: Mode) -> float:
    """ECPE contribution of one image after contrast enhancement."""
    spec = CorruptionSpec(kind=CorruptionKind.CONTRAST, factor=factor, mode=mode)
    enhanced = create_corruption(spec).apply(img)
    return relu_mass(grad_epos_analytic(patchify(enhanced, cfg), cfg))


def ecpe_accumulate(
    images: Iterable,
    factor: float,
    cfg: EarlyStageConfig,
    mode: Mode = Mode.IDEALIZED,
    seed: int = 0,
    dataset_checksum: Optional[str] = None,
    workers: int = 1,
) -> EcpeReport:
    """ECPE over a dataset at one contrast factor."""
    images = list(images)
    if not images:
        raise InvalidArgumentError("ECPE needs a nonempty dataset")
    if not factor > 0:
        raise InvalidArgumentError(f"contrast factor must be > 0, got {factor}")
    mode = Mode(mode)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_image: List[float] = list(pool.map(lambda img: image_ecpe(img, factor, cfg, mode), images))
    else:
        per_image = [image_ecpe(img, factor, cfg, mode) for img in images]

    total = pairwise_sum(per_image)
    logger.info(f"ECPE {cfg.variant.value} factor={factor} mode={mode.value}: {total:.6g} over {len(images)} images")
    return EcpeReport(
        variant=cfg.variant.value,
        corruption_factor=float(factor),
        num_images=len(images),
        ecpe_value=total,
        per_image_values=per_image,
        seed=seed,
        mode=mode,
        tool_version=__version__,
        dataset_checksum=dataset_checksum,
    )


def relative_spread(values: Sequence[float]) -> float:
    """(max - min) / max |value|; zero for constant sequences."""
    arr = np.asarray(values, dtype=np.float64)
    scale = float(np.max(np.abs(arr))) if arr.size else 0.0
    return float((arr.max() - arr.min()) / scale) if scale > 0 else 0.0


def strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))
