#!/usr/bin/env python3
"""
Demo script for the ViT Early-Stage Robustness Toolkit.
Runs a reduced version of each experiment in-process and prints the results.
"""

from pathlib import Path

from src.analysis.ecpe import ecpe_accumulate, relative_spread
from src.analysis.invariance import run_invariance_suite
from src.core.config import get_settings
from src.core.reports import Mode
from src.corruptions import CorruptionKind
from src.data_generation.synthetic_generator import SynthSpec, generate, labels_of
from src.embedding.early_stage import Variant, build_early_stage
from src.probe.benchmark import run_benchmark
from src.probe.sweep import write_sweep_csv

DEMO_OUT = Path("output") / "demo"


def demo_invariance(settings):
    """Property suite with a reduced trial count."""
    print("🔬 Demo: Scale/bias invariance suite")
    print("=" * 50)

    suite = settings.invariance.model_copy(update={"trials": 50, "gradient_configs": 3})
    for variant in (Variant.VIT, Variant.SWIN):
        report = run_invariance_suite(variant, settings.seed, suite)
        status = "✅" if report.all_passed else "❌"
        print(f"{status} {variant.label}")
        for prop in report.properties:
            print(f"   • {prop.name}: {'pass' if prop.passed else 'FAIL'}")


def demo_ecpe(settings, images, checksum):
    """ECPE under idealized contrast for both variants."""
    print("\n📉 Demo: Effective contribution of positional embedding")
    print("=" * 50)

    factors = [1.0, 2.0, 4.0]
    for variant in (Variant.VIT, Variant.SWIN):
        stage = build_early_stage(
            variant, settings.embedding.image_size, settings.embedding.patch_size,
            settings.embedding.embed_dim, settings.seed,
            pos_embed_scale=settings.embedding.pos_embed_scale, epsilon=settings.embedding.epsilon,
        )
        values = [
            ecpe_accumulate(images, f, stage, Mode.IDEALIZED, settings.seed, checksum).ecpe_value
            for f in factors
        ]
        curve = ", ".join(f"{f:g}: {v:.4f}" for f, v in zip(factors, values))
        print(f"   {variant.label:>10}  {curve}  (spread {relative_spread(values):.2e})")


def demo_benchmark(settings, images, labels, checksum):
    """Probe accuracy under PIL-style contrast."""
    print("\n🎯 Demo: Robustness benchmark (contrast)")
    print("=" * 50)

    probe_settings = settings.probe.model_copy(update={"epochs": 150})
    result = run_benchmark(
        images, labels, [Variant.VIT, Variant.SWIN], [CorruptionKind.CONTRAST],
        settings.embedding, probe_settings, mode=Mode.PIL_EXACT, seed=settings.seed,
        dataset_checksum=checksum,
    )
    for sweep in result.sweeps:
        accuracies = ", ".join(f"{f:g}: {a:.3f}" for f, a in zip(sweep.factors, sweep.accuracy))
        print(f"   {sweep.variant:>5}  {accuracies}")
    path = write_sweep_csv(result.sweeps, DEMO_OUT / "sweeps.csv")
    print(f"✅ Sweep table written to {path}")


def main():
    """Main demo function."""
    print("🚀 ViT Early-Stage Robustness Toolkit Demo")
    print("=" * 60)

    settings = get_settings()
    try:
        demo_invariance(settings)

        spec = SynthSpec(num_images=270, image_size=settings.embedding.image_size, seed=settings.seed)
        images, manifest = generate(spec, workers=settings.synth.workers)
        print(f"\n🖼️  Generated {len(images)} synthetic images")

        demo_ecpe(settings, images, manifest.checksum)
        demo_benchmark(settings, images, labels_of(manifest), manifest.checksum)

        print("\n🎉 Demo completed successfully!")
        print("\n📱 Next steps:")
        print("   • python -m src.cli.main bench --variant both for the full benchmark")
        print("   • python -m src.cli.main invariance --variant both for 1000 trials")

    except KeyboardInterrupt:
        print("\n⏹️  Demo interrupted by user")
    except Exception as e:
        print(f"\n❌ Demo failed with error: {e}")


if __name__ == "__main__":
    main()
