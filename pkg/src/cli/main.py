"""
Command-line front end.

    python -m src.cli.main invariance --variant swin --seed 7
    python -m src.cli.main generate --data data/synthetic
    python -m src.cli.main ecpe --variant both --mode idealized --factors 1,2,3,4,5
    python -m src.cli.main corrupt --kind contrast --factors 1,2 --data img.ppm --out out/
    python -m src.cli.main bench --variant both --kinds contrast,translation

Exit codes: 0 success, 1 property failure or divergence, 2 usage, 3 I/O.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from loguru import logger
from pydantic import BaseModel, Field, ValidationError, model_validator

from .. import __version__
from ..analysis.ecpe import ecpe_accumulate, relative_spread, strictly_decreasing
from ..analysis.invariance import run_invariance_suite
from ..core.config import Settings, get_settings, save_yaml_config
from ..core.errors import DatasetIOError, InvalidArgumentError, ToolkitError
from ..core.reports import EcpeCurve, EcpeSummary, Mode, write_json
from ..corruptions import CorruptionKind, CorruptionSpec, create_corruption, read_image, write_image
from ..corruptions.enhance import affine_fit_residual, saturation_fraction
from ..data_generation.synthetic_generator import SynthSpec, ensure_dataset, generate, labels_of, load_dataset, save_dataset
from ..embedding.early_stage import Variant, build_early_stage
from ..probe.benchmark import default_factors, run_benchmark
from ..probe.sweep import write_sweep_csv
from ..reporting.svg_charts import render_line_chart, write_svg

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3

IMAGE_SUFFIXES = (".ppm", ".png")
ENHANCEMENTS = (CorruptionKind.CONTRAST, CorruptionKind.BRIGHTNESS, CorruptionKind.GAMMA)


class RunConfig(BaseModel):
    """Resolved flags of one invocation; written next to the outputs."""
    command: str
    variant: Optional[str] = None
    mode: Mode = Mode.PIL_EXACT
    factors: List[float] = Field(default_factory=list)
    seed: int = 7
    patch_size: int = 16
    embed_dim: int = 64
    epsilon: float = 1e-5
    data: Optional[str] = None
    out: str = "output"
    workers: int = 1
    tool_version: str = __version__
    extra: dict = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_baseline(self):
        if self.command == "ecpe" and 1.0 not in self.factors:
            raise ValueError("ecpe factors must include the baseline 1.0")
        return self

    def variants(self) -> List[Variant]:
        if self.variant == "both":
            return [Variant.VIT, Variant.SWIN]
        return [Variant(self.variant)]


def _factor_list(text: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"factors must be a comma-separated list of numbers, got '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("factors must not be empty")
    return values


def _name_list(text: str) -> List[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def configure_logging(level: str, out_dir: Optional[Path] = None) -> None:
    logger.remove()
    logger.add(sys.stderr, level=level.upper())
    if out_dir is not None:
        logger.add(Path(out_dir) / "logs" / "run.log", level="DEBUG")


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="early-stage", description=settings.app_name)
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=settings.seed)
    common.add_argument("--out", default=str(settings.output_dir))
    common.add_argument("--log-level", default=settings.log_level)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--patch-size", type=int, default=settings.embedding.patch_size)
    common.add_argument("--embed-dim", type=int, default=settings.embedding.embed_dim)
    variants = ["vit", "swin", "both"]
    modes = [m.value for m in Mode]

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("invariance", parents=[common], help="run the invariance / inconsistency property suite")
    p.add_argument("--variant", choices=variants, required=True)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--gradient-configs", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=settings.embedding.epsilon)

    p = sub.add_parser("ecpe", parents=[common], help="ECPE over a dataset per contrast factor")
    p.add_argument("--variant", choices=variants, default="both")
    p.add_argument("--mode", choices=modes, default=Mode.IDEALIZED.value)
    p.add_argument("--factors", type=_factor_list, default=list(settings.ecpe.factors))
    p.add_argument("--data", default=str(settings.data_dir))
    p.add_argument("--epsilon", type=float, default=settings.embedding.epsilon)
    p.set_defaults(workers=settings.ecpe.workers)

    p = sub.add_parser("corrupt", parents=[common], help="write corrupted copies of images")
    p.add_argument("--kind", choices=[k.value for k in CorruptionKind], required=True)
    p.add_argument("--factors", type=_factor_list, required=True)
    p.add_argument("--mode", choices=modes, default=Mode.PIL_EXACT.value)
    p.add_argument("--data", required=True, help="image file or directory of images")
    p.add_argument("--degenerate", choices=["grayscale", "channel"], default="grayscale")
    p.add_argument("--template-size", type=int, default=256)
    p.add_argument("--crop-size", type=int, default=224)

    p = sub.add_parser("bench", parents=[common], help="train probes and run robustness sweeps")
    p.add_argument("--variant", choices=variants, default="both")
    p.add_argument("--mode", choices=modes, default=Mode.PIL_EXACT.value)
    p.add_argument("--kinds", type=_name_list, default=[k.value for k in CorruptionKind])
    p.add_argument("--factors", type=_factor_list, default=None, help="factors for a single --kinds entry")
    p.add_argument("--data", default=str(settings.data_dir))
    p.add_argument("--num-images", type=int, default=settings.synth.num_images)
    p.add_argument("--epsilon", type=float, default=settings.embedding.epsilon)

    p = sub.add_parser("generate", parents=[common], help="generate the synthetic dataset")
    p.add_argument("--data", default=str(settings.data_dir))
    p.add_argument("--num-images", type=int, default=settings.synth.num_images)
    p.add_argument("--num-classes", type=int, default=settings.synth.num_classes)
    p.add_argument("--image-size", type=int, default=settings.embedding.image_size)
    p.add_argument("--background", choices=["flat", "noise"], default=settings.synth.background)
    return parser


def _save_run_config(cfg: RunConfig) -> None:
    save_yaml_config("run_config.yaml", cfg.model_dump(mode="json"), Path(cfg.out))


def cmd_invariance(cfg: RunConfig, settings: Settings) -> int:
    updates = {k: v for k, v in cfg.extra.items() if v is not None}
    suite_settings = settings.invariance.model_copy(update=updates)
    all_passed = True
    for variant in cfg.variants():
        report = run_invariance_suite(variant, cfg.seed, suite_settings, cfg.epsilon)
        write_json(report, Path(cfg.out) / f"invariance_{variant.value}.json")
        all_passed = all_passed and report.all_passed
        for prop in report.properties:
            if not prop.passed:
                logger.error(f"{variant.value}: {prop.name} failed (seeds {prop.failing_seeds[:5]})")
    return EXIT_OK if all_passed else EXIT_FAILURE


def cmd_ecpe(cfg: RunConfig, settings: Settings) -> int:
    ecpe_settings = settings.ecpe
    images, manifest = load_dataset(cfg.data)
    curves = []
    reports = []
    series = {}
    for variant in cfg.variants():
        stage = build_early_stage(
            variant, manifest.image_size, cfg.patch_size, cfg.embed_dim, cfg.seed,
            pos_embed_scale=settings.embedding.pos_embed_scale,
            epsilon=cfg.epsilon,
            center_projection=settings.embedding.center_projection,
        )
        values = []
        for factor in cfg.factors:
            report = ecpe_accumulate(
                images, factor, stage, cfg.mode, cfg.seed,
                dataset_checksum=manifest.checksum, workers=cfg.workers,
            )
            reports.append(report)
            values.append(report.ecpe_value)

        asymptotic = ecpe_settings.asymptotic_factor
        if asymptotic in cfg.factors:
            asymptotic_value = values[cfg.factors.index(asymptotic)]
        else:
            asymptotic_value = ecpe_accumulate(images, asymptotic, stage, cfg.mode, cfg.seed, workers=cfg.workers).ecpe_value
        baseline = values[cfg.factors.index(1.0)]
        spread = relative_spread(values)
        curves.append(EcpeCurve(
            variant=variant.value,
            factors=cfg.factors,
            values=values,
            relative_spread=spread,
            strictly_decreasing=strictly_decreasing(values),
            constant=spread < ecpe_settings.constancy_tol,
            asymptotic_factor=asymptotic,
            # a zero baseline has no positional contribution left to lose
            asymptotic_ratio=asymptotic_value / baseline if baseline > 0 else 1.0,
        ))
        series[variant.label] = (cfg.factors, values)

    summary = EcpeSummary(
        mode=cfg.mode, seed=cfg.seed, tool_version=__version__,
        dataset_checksum=manifest.checksum, curves=curves, reports=reports,
    )
    out = Path(cfg.out)
    write_json(summary, out / "ecpe.json")
    write_svg(render_line_chart(series, f"ECPE vs contrast factor ({cfg.mode.value})", "contrast factor", "ECPE"),
              out / "ecpe.svg")
    for curve in curves:
        logger.info(
            f"{curve.variant}: spread {curve.relative_spread:.3g} (constant={curve.constant}), "
            f"decreasing={curve.strictly_decreasing}, ratio at {curve.asymptotic_factor:g} = {curve.asymptotic_ratio:.4f}"
        )
        if curve.variant == Variant.SWIN.value and not curve.constant:
            logger.warning(f"swin ECPE spread {curve.relative_spread:.3g} exceeds {ecpe_settings.constancy_tol:g}")
        if curve.variant == Variant.VIT.value and curve.asymptotic_ratio >= ecpe_settings.asymptotic_ratio:
            logger.warning(
                f"vit ECPE at factor {curve.asymptotic_factor:g} is {curve.asymptotic_ratio:.3f} of the baseline, "
                f"expected below {ecpe_settings.asymptotic_ratio:g}"
            )
    return EXIT_OK


class _CorruptSummary(BaseModel):
    kind: str
    mode: Mode
    tool_version: str = __version__
    entries: List[dict]


def _input_images(data: Path) -> List[Path]:
    if data.is_dir():
        return sorted(p for p in data.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not data.exists():
        raise DatasetIOError(data, "missing input")
    return [data]


def cmd_corrupt(cfg: RunConfig, settings: Settings) -> int:
    kind = CorruptionKind(cfg.extra["kind"])
    out = Path(cfg.out)
    paths = _input_images(Path(cfg.data))
    if not paths:
        raise DatasetIOError(cfg.data, "no PPM or PNG images")
    stage = None
    summary = []
    for path in paths:
        img = read_image(path)
        if stage is None and kind in ENHANCEMENTS and img.height == img.width and img.height % cfg.patch_size == 0:
            stage = build_early_stage(Variant.VIT, img.height, cfg.patch_size, cfg.embed_dim, cfg.seed)
        for factor in cfg.factors:
            spec = CorruptionSpec(
                kind=kind, factor=factor, mode=cfg.mode, degenerate=cfg.extra["degenerate"],
                template_size=cfg.extra["template_size"], crop_size=cfg.extra["crop_size"],
            )
            target = out / f"{path.stem}_{kind.value}_{factor:g}{path.suffix.lower()}"
            write_image(create_corruption(spec).apply(img), target)
            entry = {"input": path.name, "output": target.name, "factor": factor}
            if kind in ENHANCEMENTS:
                entry["saturation_fraction"] = saturation_fraction(img, spec)
                if stage is not None and img.size == (stage.image_size, stage.image_size):
                    entry["affine_fit"] = affine_fit_residual(img, spec, stage).model_dump()
            summary.append(entry)
            logger.debug(f"Wrote {target}")
    write_json(_CorruptSummary(kind=kind.value, mode=cfg.mode, entries=summary), out / "corrupt_summary.json")
    logger.info(f"Corrupted {len(paths)} image(s) at {len(cfg.factors)} factor(s) into {out}")
    return EXIT_OK


def cmd_bench(cfg: RunConfig, settings: Settings) -> int:
    kinds = [CorruptionKind(k) for k in cfg.extra["kinds"]]
    factors = default_factors(settings.probe)
    if cfg.factors:
        if len(kinds) != 1:
            raise InvalidArgumentError("--factors applies to exactly one --kinds entry")
        factors[kinds[0]] = list(cfg.factors)

    synth = SynthSpec(
        num_images=cfg.extra["num_images"],
        image_size=settings.embedding.image_size,
        num_classes=settings.synth.num_classes,
        seed=cfg.seed,
        background=settings.synth.background,
        patch_size=cfg.patch_size,
    )
    images, manifest = ensure_dataset(cfg.data, synth, settings.synth.workers)
    embedding = settings.embedding.model_copy(update={
        "patch_size": cfg.patch_size, "embed_dim": cfg.embed_dim,
        "epsilon": cfg.epsilon, "image_size": manifest.image_size,
    })
    out = Path(cfg.out)
    result = run_benchmark(
        images, labels_of(manifest), cfg.variants(), kinds, embedding, settings.probe,
        mode=cfg.mode, seed=cfg.seed, factors=factors, dataset_checksum=manifest.checksum,
        workers=cfg.workers, probe_dir=out / "probes",
    )
    write_json(result, out / "bench.json")
    write_sweep_csv(result.sweeps, out / "sweeps.csv")
    for kind in kinds:
        series = {
            Variant(s.variant).label: (s.factors, s.accuracy)
            for s in result.sweeps if s.corruption == kind.value
        }
        chart = render_line_chart(series, f"Test accuracy under {kind.value} ({cfg.mode.value})", kind.value, "accuracy")
        write_svg(chart, out / f"sweep_{kind.value}.svg")
    return EXIT_OK


def cmd_generate(cfg: RunConfig, settings: Settings) -> int:
    spec = SynthSpec(
        num_images=cfg.extra["num_images"],
        image_size=cfg.extra["image_size"],
        num_classes=cfg.extra["num_classes"],
        seed=cfg.seed,
        background=cfg.extra["background"],
        patch_size=cfg.patch_size,
    )
    images, manifest = generate(spec, cfg.workers)
    save_dataset(images, manifest, cfg.data)
    logger.info(f"Dataset checksum {manifest.checksum}")
    return EXIT_OK


COMMANDS = {
    "invariance": cmd_invariance,
    "ecpe": cmd_ecpe,
    "corrupt": cmd_corrupt,
    "bench": cmd_bench,
    "generate": cmd_generate,
}


def _run_config(args: argparse.Namespace) -> RunConfig:
    extra_keys = {
        "invariance": ["trials", "gradient_configs"],
        "corrupt": ["kind", "degenerate", "template_size", "crop_size"],
        "bench": ["kinds", "num_images"],
        "generate": ["num_images", "num_classes", "image_size", "background"],
    }.get(args.command, [])
    extra = {key: getattr(args, key) for key in extra_keys}
    return RunConfig(
        command=args.command,
        variant=getattr(args, "variant", None),
        mode=getattr(args, "mode", Mode.PIL_EXACT.value),
        factors=getattr(args, "factors", None) or [],
        seed=args.seed,
        patch_size=args.patch_size,
        embed_dim=args.embed_dim,
        epsilon=getattr(args, "epsilon", 1e-5),
        data=getattr(args, "data", None),
        out=args.out,
        workers=args.workers,
        extra=extra,
    )


def main(argv: Optional[List[str]] = None) -> int:
    settings = get_settings()
    parser = build_parser(settings)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    configure_logging(args.log_level, Path(args.out))
    try:
        cfg = _run_config(args)
    except ValidationError as e:
        parser.print_usage(sys.stderr)
        logger.error(f"Invalid arguments: {e.errors()[0]['msg']}")
        return EXIT_USAGE

    try:
        _save_run_config(cfg)
        return COMMANDS[cfg.command](cfg, settings)
    except ToolkitError as e:
        logger.error(f"{cfg.command} failed: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"{cfg.command} failed: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
