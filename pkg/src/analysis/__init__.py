"""
Numerical analysis: invariance property suite and ECPE gradient attribution.
"""
