"""
ViT Early-Stage Robustness Toolkit

Patch embedding with and without PreLayerNorm, scale/bias invariance checks,
positional-embedding gradient attribution and corruption robustness sweeps.
"""

__version__ = "1.0.0"
__author__ = "Early-Stage Robustness Team"
