#!/usr/bin/env python3
"""
Setup script for the ViT Early-Stage Robustness Toolkit.
Creates working directories, a .env file and the synthetic dataset.
"""

import sys
from pathlib import Path


def check_python_version():
    """Check if Python version is compatible."""
    if sys.version_info < (3, 9):
        print("❌ Python 3.9 or higher is required")
        return False
    print(f"✅ Python {sys.version_info.major}.{sys.version_info.minor} detected")
    return True


def create_directories():
    """Create necessary directories."""
    directories = [
        "data/synthetic",
        "output",
        "logs",
    ]

    for directory in directories:
        Path(directory).mkdir(parents=True, exist_ok=True)

    print("✅ Created necessary directories")
    return True


def create_env_file():
    """Create a .env file with basic configuration."""
    env_file = Path(".env")

    if not env_file.exists():
        env_content = """# ViT Early-Stage Robustness Toolkit environment variables
# Values here override config/experiment_config.yaml

# Logging
APP_LOG_LEVEL=INFO
APP_SEED=7

# Early stage
# EMBED_EPSILON=1e-5
# EMBED_POS_EMBED_SCALE=16

# Probe
# PROBE_EPOCHS=300
"""

        with open(env_file, 'w') as f:
            f.write(env_content)

        print("✅ Created .env file with basic configuration")
    else:
        print("✅ .env file already exists")

    return True


def generate_dataset():
    """Generate the synthetic dataset unless it already exists."""
    try:
        from src.core.config import get_settings
        from src.data_generation.synthetic_generator import SynthSpec, ensure_dataset

        settings = get_settings()
        spec = SynthSpec(
            num_images=settings.synth.num_images,
            image_size=settings.embedding.image_size,
            num_classes=settings.synth.num_classes,
            seed=settings.seed,
            background=settings.synth.background,
            patch_size=settings.embedding.patch_size,
        )
        _, manifest = ensure_dataset(settings.data_dir, spec, settings.synth.workers)
        print(f"✅ Dataset ready ({len(manifest.entries)} images, checksum {manifest.checksum[:12]}...)")
        return True
    except Exception as e:
        print(f"❌ Failed to generate dataset: {e}")
        return False


def main():
    """Main setup function."""
    print("🚀 ViT Early-Stage Robustness Toolkit Setup")
    print("=" * 50)

    if not check_python_version():
        return False

    if not create_directories():
        return False

    if not create_env_file():
        return False

    if not generate_dataset():
        return False

    print("\n🎉 Setup completed successfully!")
    print("\n📋 Next steps:")
    print("1. Run: python -m src.cli.main invariance --variant both")
    print("2. Run: python -m src.cli.main ecpe --variant both")
    print("3. Run: python demo.py")

    return True


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
