"""
Monte-Carlo property suite for the early stage.

Checks, for one variant and one seed:

* normalization invariance: N(aX + b) == N(X) for sampled X
* SwinStyle end-to-end invariance, or VitStyle inconsistency
* zero-variance rows stay finite
* patchify linearity
* analytic dE_pos gradient against central differences
* consistency gap over a grid of scales

Every trial draws its inputs from a child seed of the suite seed, so a failing
trial can be replayed from the seed recorded in the report.
"""

import math
from typing import List, Union

import numpy as np
from loguru import logger

from .. import __version__
from ..core.config import InvarianceSettings
from ..core.errors import InvalidArgumentError
from ..core.reports import InvarianceReport, PropertyResult
from ..core.tensor import derive_seeds, mat_random_uniform
from ..embedding.early_stage import EarlyStageConfig, ScaleBias, Variant, build_early_stage, consistency_gap, early_stage_forward, patchify
from ..embedding.layer_norm import DEFAULT_EPSILON, ln_normalize, zero_variance_rows
from ..corruptions.image_io import Image
from .ecpe import gradient_check


def _suite_config(variant: Variant, rows: int, cols: int, seed: int, epsilon: float, pos_scale: float = 1.0) -> EarlyStageConfig:
    """Config whose patch matrix is rows x cols; patches are fed directly, so patch_size is 1."""
    side = math.isqrt(rows)
    if side * side != rows:
        raise InvalidArgumentError(f"suite row count must be a perfect square, got {rows}")
    return build_early_stage(
        variant, image_size=side, patch_size=1, embed_dim=cols, seed=seed,
        pos_embed_scale=pos_scale, epsilon=epsilon,
    )


def _scale_bias_grid(settings: InvarianceSettings) -> List[ScaleBias]:
    return [ScaleBias(a, b) for a in settings.scales for b in settings.biases]


def normalization_invariance(variant: Variant, seed: int, settings: InvarianceSettings,
                             epsilon: float = DEFAULT_EPSILON) -> PropertyResult:
    worst = 0.0
    failing: List[int] = []
    grid = _scale_bias_grid(settings)
    lo, hi = -settings.sample_scale, settings.sample_scale
    for trial_seed in derive_seeds(seed, settings.trials):
        x = mat_random_uniform(settings.rows, settings.cols, lo, hi, trial_seed)
        base = ln_normalize(x, epsilon)
        trial_worst = max(float(np.max(np.abs(ln_normalize(sb.a * x + sb.b, epsilon) - base))) for sb in grid)
        if trial_worst >= settings.normalization_tol:
            failing.append(trial_seed)
        worst = max(worst, trial_worst)
    return PropertyResult(
        name="normalization_invariance",
        variant=variant.value,
        passed=not failing,
        measured={"max_abs_difference": worst, "tolerance": settings.normalization_tol, "trials": settings.trials},
        failing_seeds=failing,
    )


def swin_invariance(seed: int, settings: InvarianceSettings, epsilon: float = DEFAULT_EPSILON) -> PropertyResult:
    worst = 0.0
    failing: List[int] = []
    grid = _scale_bias_grid(settings)
    lo, hi = -settings.sample_scale, settings.sample_scale
    for trial_seed in derive_seeds(seed, settings.trials):
        x_seed, cfg_seed = derive_seeds(trial_seed, 2)
        cfg = _suite_config(Variant.SWIN, settings.rows, settings.cols, cfg_seed, epsilon)
        x = mat_random_uniform(settings.rows, settings.cols, lo, hi, x_seed)
        trial_worst = max(consistency_gap(x, sb, cfg) for sb in grid)
        if trial_worst >= settings.swin_gap_tol:
            failing.append(trial_seed)
        worst = max(worst, trial_worst)
    return PropertyResult(
        name="swin_end_to_end_invariance",
        variant=Variant.SWIN.value,
        passed=not failing,
        measured={"max_gap": worst, "tolerance": settings.swin_gap_tol, "trials": settings.trials},
        failing_seeds=failing,
    )


def vit_inconsistency(seed: int, settings: InvarianceSettings, epsilon: float = DEFAULT_EPSILON) -> PropertyResult:
    """Fraction of trials with gap(a, b) above the threshold; E_pos ~ U[-1, 1]."""
    sb = ScaleBias(settings.inconsistency_scale, settings.inconsistency_bias)
    gaps: List[float] = []
    failing: List[int] = []
    for trial_seed in derive_seeds(seed, settings.trials):
        x_seed, cfg_seed = derive_seeds(trial_seed, 2)
        cfg = _suite_config(Variant.VIT, settings.rows, settings.cols, cfg_seed, epsilon)
        x = mat_random_uniform(settings.rows, settings.cols, -1.0, 1.0, x_seed)
        gap = consistency_gap(x, sb, cfg)
        gaps.append(gap)
        if not gap > settings.gap_threshold:
            failing.append(trial_seed)
    pass_rate = 1.0 - len(failing) / settings.trials
    return PropertyResult(
        name="vit_inconsistency",
        variant=Variant.VIT.value,
        passed=pass_rate >= settings.min_pass_rate,
        measured={
            "a": sb.a,
            "b": sb.b,
            "pass_rate": pass_rate,
            "min_gap": float(np.min(gaps)),
            "median_gap": float(np.median(gaps)),
            "threshold": settings.gap_threshold,
            "trials": settings.trials,
        },
        failing_seeds=failing,
    )


def zero_variance_handling(variant: Variant, seed: int, settings: InvarianceSettings,
                           epsilon: float = DEFAULT_EPSILON) -> PropertyResult:
    """Constant patch rows go through the epsilon path without NaN."""
    x_seed, cfg_seed = derive_seeds(seed, 2)
    cfg = _suite_config(variant, settings.rows, settings.cols, cfg_seed, epsilon)
    x = np.array(mat_random_uniform(settings.rows, settings.cols, -1.0, 1.0, x_seed))
    constant_rows = np.arange(0, settings.rows, 2)
    # integer levels keep the row mean exact
    x[constant_rows] = (np.arange(constant_rows.size) % 7 - 3.0)[:, None]
    flagged = zero_variance_rows(x)
    normalized = ln_normalize(x, epsilon)
    z = early_stage_forward(x, cfg)
    finite = bool(np.all(np.isfinite(z)))
    zeroed = bool(np.all(normalized[constant_rows] == 0.0))
    return PropertyResult(
        name="zero_variance_rows",
        variant=variant.value,
        passed=finite and zeroed and np.array_equal(flagged, constant_rows),
        measured={"constant_rows": int(constant_rows.size), "flagged": int(flagged.size), "finite_output": finite},
    )


def patchify_linearity(variant: Variant, seed: int, settings: InvarianceSettings,
                       image_size: int = 32, patch_size: int = 16) -> PropertyResult:
    """patchify(a * img) == a * patchify(img) with zero projection bias."""
    img_seed, cfg_seed = derive_seeds(seed, 2)
    cfg = build_early_stage(variant, image_size, patch_size, settings.cols, cfg_seed)
    pixels = np.asarray(mat_random_uniform(image_size * image_size, 3, 0.0, 255.0, img_seed))
    img = Image(pixels.reshape(image_size, image_size, 3))
    base = patchify(img, cfg)
    worst = 0.0
    for a in settings.scales:
        scaled = patchify(Image(a * img.pixels), cfg)
        expected = a * base
        worst = max(worst, float(np.max(np.abs(scaled - expected)) / np.max(np.abs(expected))))
    return PropertyResult(
        name="patchify_linearity",
        variant=variant.value,
        passed=worst < 1e-12,
        measured={"max_relative_error": worst},
    )


def gradient_agreement(variant: Variant, seed: int, settings: InvarianceSettings,
                       epsilon: float = DEFAULT_EPSILON) -> PropertyResult:
    """Analytic against central-difference dZ/dE_pos over seeded configurations."""
    worst_rel = 0.0
    checked = 0
    failing: List[int] = []
    for config_seed in derive_seeds(seed, settings.gradient_configs):
        x_seed, cfg_seed = derive_seeds(config_seed, 2)
        cfg = _suite_config(variant, settings.gradient_rows, settings.gradient_cols, cfg_seed, epsilon)
        x = mat_random_uniform(settings.gradient_rows, settings.gradient_cols, -1.0, 1.0, x_seed)
        result = gradient_check(
            x, cfg,
            h=settings.fd_step,
            rtol=settings.gradient_rtol,
            atol=settings.gradient_atol,
            mask=settings.gradient_mask,
        )
        worst_rel = max(worst_rel, result.max_rel_error)
        checked += result.checked
        if not result.passed:
            logger.warning(f"Gradient check failed for seed {config_seed}: {result.failures} element(s)")
            failing.append(config_seed)
    return PropertyResult(
        name="gradient_check",
        variant=variant.value,
        passed=not failing,
        measured={
            "max_relative_error": worst_rel,
            "checked_elements": checked,
            "configs": settings.gradient_configs,
            "fd_step": settings.fd_step,
        },
        failing_seeds=failing,
    )


def gap_scale_curve(variant: Variant, seed: int, settings: InvarianceSettings,
                    epsilon: float = DEFAULT_EPSILON) -> PropertyResult:
    """consistency_gap(aX) over a grid of a, with E_pos at the scale of X.

    SwinStyle stays flat at zero; VitStyle is zero only at a = 1.
    """
    x_seed, cfg_seed = derive_seeds(seed, 2)
    scale = settings.sample_scale
    cfg = _suite_config(variant, settings.rows, settings.cols, cfg_seed, epsilon, pos_scale=scale)
    x = mat_random_uniform(settings.rows, settings.cols, -scale, scale, x_seed)
    gaps = [consistency_gap(x, ScaleBias(a, 0.0), cfg) for a in settings.curve_scales]
    identity_gaps = [g for a, g in zip(settings.curve_scales, gaps) if a == 1.0]
    if variant is Variant.SWIN:
        passed = max(gaps) < settings.normalization_tol
    else:
        passed = all(g == 0.0 for g in identity_gaps) and max(gaps) > settings.gap_threshold
    return PropertyResult(
        name="gap_scale_curve",
        variant=variant.value,
        passed=passed,
        measured={"scales": list(settings.curve_scales), "gaps": gaps},
    )


def run_invariance_suite(variant: Union[Variant, str], seed: int, settings: InvarianceSettings,
                         epsilon: float = DEFAULT_EPSILON) -> InvarianceReport:
    """Run every property for one variant and collect the results."""
    variant = Variant(variant)
    logger.info(f"Running invariance suite for {variant.value} (seed={seed}, trials={settings.trials})")

    properties = [normalization_invariance(variant, seed, settings, epsilon)]
    if variant is Variant.SWIN:
        properties.append(swin_invariance(seed, settings, epsilon))
    else:
        properties.append(vit_inconsistency(seed, settings, epsilon))
    properties.append(zero_variance_handling(variant, seed, settings, epsilon))
    properties.append(patchify_linearity(variant, seed, settings))
    properties.append(gradient_agreement(variant, seed, settings, epsilon))
    properties.append(gap_scale_curve(variant, seed, settings, epsilon))

    for prop in properties:
        status = "PASS" if prop.passed else "FAIL"
        logger.info(f"  {prop.name}: {status} {prop.measured}")

    return InvarianceReport(
        variant=variant.value,
        seed=seed,
        tool_version=__version__,
        all_passed=all(p.passed for p in properties),
        properties=properties,
    )
