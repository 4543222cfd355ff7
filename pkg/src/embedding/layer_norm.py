"""
LayerNorm split into its two steps.

``ln_normalize`` is the per-row standardization N(.), ``ln_affine`` the
per-channel rescaling L(.) with gamma and beta. ``layer_norm_backward`` is the
input gradient of L(N(.)) for an arbitrary upstream gradient.
"""

from dataclasses import dataclass

import numpy as np
from loguru import logger

from ..core.errors import InvalidArgumentError, ShapeError
from ..core.tensor import Matrix, Vector, as_matrix, freeze, mat_random_uniform, row_mean_var

DEFAULT_EPSILON = 1e-5


@dataclass(frozen=True)
class LayerNormParams:
    """Per-channel scale and shift of length D plus the variance stabilizer."""
    gamma: Vector
    beta: Vector
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        gamma = freeze(np.array(self.gamma, dtype=np.float64).reshape(-1))
        beta = freeze(np.array(self.beta, dtype=np.float64).reshape(-1))
        if gamma.shape != beta.shape:
            raise ShapeError(f"gamma has length {gamma.size}, beta has length {beta.size}")
        if not self.epsilon > 0:
            raise InvalidArgumentError(f"epsilon must be > 0, got {self.epsilon}")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "beta", beta)

    @property
    def dim(self) -> int:
        return int(self.gamma.size)

    @classmethod
    def identity(cls, dim: int, epsilon: float = DEFAULT_EPSILON) -> "LayerNormParams":
        return cls(np.ones(dim), np.zeros(dim), epsilon)

    @classmethod
    def random(cls, dim: int, seed: int, epsilon: float = DEFAULT_EPSILON) -> "LayerNormParams":
        """gamma ~ U[0.5, 1.5), beta ~ U[-0.5, 0.5)."""
        values = mat_random_uniform(2, dim, 0.0, 1.0, seed)
        return cls(values[0] + 0.5, values[1] - 0.5, epsilon)


def ln_normalize(x: Matrix, epsilon: float = DEFAULT_EPSILON) -> Matrix:
    """Each row r becomes (r - mean) / sqrt(var + epsilon)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] < 2:
        raise ShapeError(f"ln_normalize needs cols >= 2, got shape {x.shape}")
    means, variances = row_mean_var(x)
    flat_rows = int(np.count_nonzero(variances == 0.0))
    if flat_rows:
        logger.debug(f"ln_normalize: {flat_rows} zero-variance row(s) mapped to zero")
    return freeze((x - means[:, None]) / np.sqrt(variances + epsilon)[:, None])


def ln_affine(x: Matrix, params: LayerNormParams) -> Matrix:
    """out[n, d] = gamma[d] * x[n, d] + beta[d]."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.dim:
        raise ShapeError(f"ln_affine: input has shape {x.shape}, params have length {params.dim}")
    return freeze(x * params.gamma + params.beta)


def layer_norm(x: Matrix, params: LayerNormParams) -> Matrix:
    return ln_affine(ln_normalize(x, params.epsilon), params)


def zero_variance_rows(x: Matrix) -> np.ndarray:
    """Indices of constant rows, the rows where epsilon alone keeps N(.) finite."""
    _, variances = row_mean_var(x)
    return np.flatnonzero(variances == 0.0)


def layer_norm_backward(x: Matrix, upstream: Matrix, params: LayerNormParams) -> Matrix:
    """Gradient of sum(upstream * L(N(x))) with respect to x.

    For a row v with y = (v - mean) / s, s = sqrt(var + eps) and upstream g:
    dv = (gamma*g - mean(gamma*g) - y * mean(gamma*g*y)) / s
    """
    x = as_matrix(x, "x")
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != x.shape:
        raise ShapeError(f"upstream gradient {upstream.shape} does not match input {x.shape}")
    if x.shape[1] != params.dim:
        raise ShapeError(f"input has {x.shape[1]} channels, params have {params.dim}")
    means, variances = row_mean_var(x)
    inv_std = 1.0 / np.sqrt(variances + params.epsilon)
    y = (x - means[:, None]) * inv_std[:, None]
    scaled = upstream * params.gamma
    grad = scaled - scaled.mean(axis=1, keepdims=True) - y * (scaled * y).mean(axis=1, keepdims=True)
    return freeze(grad * inv_std[:, None])
