#!/usr/bin/env python3
"""
Tests for the N(.) and L(.) steps of LayerNorm and its input gradient.
"""

import numpy as np
import pytest

from src.core.errors import InvalidArgumentError, ShapeError
from src.core.tensor import mat_random_uniform
from src.embedding.layer_norm import (
    LayerNormParams,
    layer_norm,
    layer_norm_backward,
    ln_affine,
    ln_normalize,
    zero_variance_rows,
)


def test_normalize_small_epsilon_limit():
    out = ln_normalize(np.array([[1.0, 2.0, 3.0]]), epsilon=1e-15)
    np.testing.assert_allclose(out, [[-1.22474487, 0.0, 1.22474487]], atol=1e-8)


def test_normalize_constant_row_is_zero():
    out = ln_normalize(np.array([[5.0, 5.0, 5.0]]))
    assert np.array_equal(out, np.zeros((1, 3)))
    assert list(zero_variance_rows(np.array([[5.0, 5.0, 5.0], [1.0, 2.0, 3.0]]))) == [0]


def test_normalize_requires_two_columns():
    with pytest.raises(ShapeError):
        ln_normalize(np.array([[1.0]]))


def test_normalize_scale_bias_invariance():
    x = mat_random_uniform(36, 64, -300.0, 300.0, seed=5)
    np.testing.assert_allclose(ln_normalize(2.0 * x + 1.0), ln_normalize(x), atol=1e-9)


def test_affine_examples():
    x = np.array([[1.0, -1.0]])
    assert np.array_equal(ln_affine(x, LayerNormParams.identity(2)), x)
    out = ln_affine(x, LayerNormParams([2.0, 3.0], [1.0, 1.0]))
    np.testing.assert_allclose(out, [[3.0, -2.0]])
    zeroed = ln_affine(np.array([[4.0, 7.0], [1.0, 2.0]]), LayerNormParams([0.0, 0.0], [0.5, -0.5]))
    assert np.array_equal(zeroed, [[0.5, -0.5], [0.5, -0.5]])


def test_affine_length_mismatch():
    with pytest.raises(ShapeError):
        ln_affine(np.zeros((2, 3)), LayerNormParams.identity(2))


def test_params_validation():
    with pytest.raises(ShapeError):
        LayerNormParams([1.0, 1.0], [0.0])
    with pytest.raises(InvalidArgumentError):
        LayerNormParams([1.0], [0.0], epsilon=0.0)


def test_random_params_ranges():
    params = LayerNormParams.random(64, seed=3)
    assert np.all((params.gamma >= 0.5) & (params.gamma < 1.5))
    assert np.all((params.beta >= -0.5) & (params.beta < 0.5))


def test_backward_matches_central_differences():
    x = np.array(mat_random_uniform(4, 8, -1.0, 1.0, seed=21))
    upstream = np.array(mat_random_uniform(4, 8, -1.0, 1.0, seed=22))
    params = LayerNormParams.random(8, seed=23)
    analytic = layer_norm_backward(x, upstream, params)
    h = 1e-6
    numeric = np.zeros_like(x)
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            plus, minus = x.copy(), x.copy()
            plus[i, j] += h
            minus[i, j] -= h
            numeric[i, j] = np.sum(upstream * (layer_norm(plus, params) - layer_norm(minus, params))) / (2 * h)
    np.testing.assert_allclose(analytic, numeric, rtol=1e-6, atol=1e-8)


def test_backward_with_zero_gamma_is_zero():
    x = mat_random_uniform(3, 6, -1.0, 1.0, seed=1)
    params = LayerNormParams(np.zeros(6), np.ones(6))
    assert np.array_equal(layer_norm_backward(x, np.ones((3, 6)), params), np.zeros((3, 6)))


def test_backward_unit_gamma_all_ones_upstream_vanishes():
    x = mat_random_uniform(3, 6, -1.0, 1.0, seed=2)
    grad = layer_norm_backward(x, np.ones((3, 6)), LayerNormParams.identity(6))
    np.testing.assert_allclose(grad, 0.0, atol=1e-12)
