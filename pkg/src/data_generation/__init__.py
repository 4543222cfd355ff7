"""
Deterministic synthetic datasets and their manifests.
"""
