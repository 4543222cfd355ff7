"""
Configuration management for the early-stage robustness toolkit.
"""

import os
from pathlib import Path
from typing import Dict, Any, List
import yaml
from pydantic_settings import BaseSettings
from pydantic import Field
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

CONFIG_DIR = Path(__file__).parent.parent.parent / "config"
EXPERIMENT_CONFIG = "experiment_config.yaml"


def load_yaml_config(file_path: str, config_dir: Path = CONFIG_DIR) -> Dict[str, Any]:
    """Load configuration from YAML file."""
    config_file = Path(config_dir) / file_path
    if config_file.exists():
        with open(config_file, 'r') as f:
            return yaml.safe_load(f) or {}
    return {}


def save_yaml_config(file_path: str, config: Dict[str, Any], config_dir: Path = CONFIG_DIR) -> Path:
    """Save configuration to YAML file."""
    config_file = Path(config_dir) / file_path
    config_file.parent.mkdir(parents=True, exist_ok=True)
    with open(config_file, 'w') as f:
        yaml.safe_dump(config, f, default_flow_style=False, sort_keys=True)
    return config_file


def _yaml_defaults(section: str, env_prefix: str) -> Dict[str, Any]:
    """YAML values for a section, skipping keys already set in the environment."""
    values = load_yaml_config(EXPERIMENT_CONFIG).get(section) or {}
    return {
        key: value
        for key, value in values.items()
        if not os.getenv(f"{env_prefix}{key.upper()}")
    }


class EmbeddingSettings(BaseSettings):
    """Early-stage pipeline configuration."""
    image_size: int = Field(default=96)
    patch_size: int = Field(default=16)
    embed_dim: int = Field(default=64)
    epsilon: float = Field(default=1e-5)

    # Magnitude of E_pos for dataset experiments (U[-s, s])
    pos_embed_scale: float = Field(default=16.0)

    # Zero-sum projection columns: a uniform grey image maps to the zero token
    center_projection: bool = Field(default=True)

    class Config:
        env_prefix = "EMBED_"


class InvarianceSettings(BaseSettings):
    """Monte-Carlo property suite configuration."""
    trials: int = Field(default=1000)
    rows: int = Field(default=36)
    cols: int = Field(default=64)

    # Entries of invariance samples are U[-s, s]; keeps row variance far above epsilon
    sample_scale: float = Field(default=300.0)
    scales: List[float] = Field(default=[0.5, 2.0, 5.0])
    biases: List[float] = Field(default=[-1.0, 0.0, 3.0])
    normalization_tol: float = Field(default=1e-6)
    swin_gap_tol: float = Field(default=1e-8)

    # Inconsistency trials
    inconsistency_scale: float = Field(default=2.0)
    inconsistency_bias: float = Field(default=0.5)
    gap_threshold: float = Field(default=1e-2)
    min_pass_rate: float = Field(default=0.99)

    # Gradient check
    gradient_configs: int = Field(default=20)
    gradient_rows: int = Field(default=36)
    gradient_cols: int = Field(default=64)
    fd_step: float = Field(default=1e-5)
    gradient_rtol: float = Field(default=1e-5)
    gradient_atol: float = Field(default=1e-9)
    gradient_mask: float = Field(default=1e-8)

    # Gap-vs-scale curve
    curve_scales: List[float] = Field(default=[0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0])

    class Config:
        env_prefix = "INVARIANCE_"


class EcpeSettings(BaseSettings):
    """ECPE measurement configuration."""
    factors: List[float] = Field(default=[1.0, 2.0, 3.0, 4.0, 5.0])
    # VitStyle: ECPE at asymptotic_factor should fall below asymptotic_ratio x baseline
    asymptotic_factor: float = Field(default=16.0)
    asymptotic_ratio: float = Field(default=0.9)
    # SwinStyle: relative spread over factors below which the curve counts as constant
    constancy_tol: float = Field(default=1e-9)
    workers: int = Field(default=4)

    class Config:
        env_prefix = "ECPE_"


class SynthSettings(BaseSettings):
    """Synthetic dataset configuration."""
    num_images: int = Field(default=900)
    num_classes: int = Field(default=9)
    background: str = Field(default="noise")
    workers: int = Field(default=4)

    class Config:
        env_prefix = "SYNTH_"


class ProbeSettings(BaseSettings):
    """Linear probe and robustness sweep configuration."""
    lr: float = Field(default=0.5)
    epochs: int = Field(default=300)
    l2: float = Field(default=1e-3)
    reduction: str = Field(default="mean_pool")
    split: List[float] = Field(default=[0.70, 0.15, 0.15])

    # Sweeps
    contrast_factors: List[float] = Field(default=[1.0, 2.0, 3.0])
    brightness_factors: List[float] = Field(default=[1.0, 1.5, 2.0, 3.0])
    gamma_factors: List[float] = Field(default=[1.0, 0.5, 2.0])
    rotation_degrees: List[float] = Field(default=[0.0, 5.0, 15.0, 30.0, 45.0])
    translation_shifts: List[float] = Field(default=[0.0, 4.0, 8.0, 16.0])

    # Translation protocol: template short side for the dataset image size
    translation_template: int = Field(default=128)
    max_rotation: float = Field(default=45.0)

    class Config:
        env_prefix = "PROBE_"


class Settings(BaseSettings):
    """Main application settings."""
    app_name: str = Field(default="ViT Early-Stage Robustness Toolkit")
    log_level: str = Field(default="INFO")
    seed: int = Field(default=7)

    # Component settings
    embedding: EmbeddingSettings = Field(
        default_factory=lambda: EmbeddingSettings(**_yaml_defaults("embedding", "EMBED_")))
    invariance: InvarianceSettings = Field(
        default_factory=lambda: InvarianceSettings(**_yaml_defaults("invariance", "INVARIANCE_")))
    ecpe: EcpeSettings = Field(
        default_factory=lambda: EcpeSettings(**_yaml_defaults("ecpe", "ECPE_")))
    synth: SynthSettings = Field(
        default_factory=lambda: SynthSettings(**_yaml_defaults("synth", "SYNTH_")))
    probe: ProbeSettings = Field(
        default_factory=lambda: ProbeSettings(**_yaml_defaults("probe", "PROBE_")))

    # File paths
    base_dir: Path = Path(__file__).parent.parent.parent
    config_dir: Path = base_dir / "config"
    data_dir: Path = base_dir / "data" / "synthetic"
    output_dir: Path = base_dir / "output"

    class Config:
        env_prefix = "APP_"


# Global settings instance
settings = Settings(**_yaml_defaults("app", "APP_"))


def get_settings() -> Settings:
    """Get the global settings instance."""
    return settings
