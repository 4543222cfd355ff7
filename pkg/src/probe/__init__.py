"""
Linear probe on frozen early-stage features and robustness sweeps.
"""
