"""
Dense float64 matrices for the analysis path.

A Matrix is a 2-D ``numpy.ndarray`` of dtype float64 whose write flag is
cleared after construction, so every value handed out by this module is
immutable. Randomness comes from numpy's PCG64 bit generator: a seed fully
determines the stream on every platform.
"""

from typing import List, Tuple

import numpy as np
from numpy.typing import NDArray

from .errors import InvalidArgumentError, ShapeError

Matrix = NDArray[np.float64]
Vector = NDArray[np.float64]
RngSeed = int

_UINT64_MAX = 2 ** 64 - 1


def freeze(array: np.ndarray) -> np.ndarray:
    """Clear the write flag and return the same array."""
    array.flags.writeable = False
    return array


def as_matrix(values, name: str = "matrix") -> Matrix:
    """Coerce to an immutable float64 matrix, rejecting bad shapes and non-finite values."""
    m = np.array(values, dtype=np.float64, copy=True)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"{name} must have at least one row and column, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidArgumentError(f"{name} contains non-finite values")
    return freeze(m)


def check_seed(seed: RngSeed) -> int:
    seed = int(seed)
    if seed < 0 or seed > _UINT64_MAX:
        raise InvalidArgumentError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def make_rng(seed: RngSeed) -> np.random.Generator:
    """PCG64 generator for a seed."""
    return np.random.Generator(np.random.PCG64(check_seed(seed)))


def derive_seeds(seed: RngSeed, count: int) -> List[int]:
    """Independent child seeds, stable for a given parent seed."""
    state = np.random.SeedSequence(check_seed(seed)).generate_state(count, dtype=np.uint64)
    return [int(s) for s in state]


def mat_random_uniform(rows: int, cols: int, lo: float, hi: float, seed: RngSeed) -> Matrix:
    """Matrix of values uniform in [lo, hi), drawn from PCG64(seed)."""
    if rows < 1 or cols < 1:
        raise InvalidArgumentError(f"dimensions must be >= 1, got {rows}x{cols}")
    if not lo < hi:
        raise InvalidArgumentError(f"need lo < hi, got lo={lo} hi={hi}")
    unit = make_rng(seed).random((rows, cols))
    values = lo + (hi - lo) * unit
    # lo + (hi - lo) * u can round up to hi for u close to 1
    values = np.minimum(values, np.nextafter(hi, lo))
    return freeze(values)


def row_mean_var(m: Matrix) -> Tuple[Vector, Vector]:
    """Per-row population mean and variance (divisor D)."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[1] < 1:
        raise ShapeError(f"row_mean_var needs a 2-D matrix with cols >= 1, got {m.shape}")
    means = m.mean(axis=1)
    variances = ((m - means[:, None]) ** 2).mean(axis=1)
    return freeze(means), freeze(variances)


def frobenius(m: Matrix) -> float:
    return float(np.linalg.norm(np.asarray(m, dtype=np.float64)))
