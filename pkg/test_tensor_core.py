#!/usr/bin/env python3
"""
Tests for the dense matrix layer: seeded uniform matrices and row statistics.
"""

import numpy as np
import pytest

from src.core.errors import InvalidArgumentError, ShapeError
from src.core.tensor import as_matrix, derive_seeds, frobenius, mat_random_uniform, row_mean_var


def test_random_uniform_single_value_in_range():
    m = mat_random_uniform(1, 1, 0.0, 1.0, seed=7)
    assert m.shape == (1, 1)
    assert 0.0 <= m[0, 0] < 1.0


def test_random_uniform_is_reproducible():
    a = mat_random_uniform(2, 3, -1.0, 1.0, seed=42)
    b = mat_random_uniform(2, 3, -1.0, 1.0, seed=42)
    assert np.array_equal(a, b)
    assert np.all((a >= -1.0) & (a < 1.0))


def test_random_uniform_differs_between_seeds():
    a = mat_random_uniform(4, 4, 0.0, 1.0, seed=1)
    b = mat_random_uniform(4, 4, 0.0, 1.0, seed=2)
    assert not np.array_equal(a, b)


def test_random_uniform_rejects_bad_arguments():
    with pytest.raises(InvalidArgumentError):
        mat_random_uniform(0, 3, 0.0, 1.0, seed=1)
    with pytest.raises(InvalidArgumentError):
        mat_random_uniform(2, 2, 1.0, 1.0, seed=1)
    with pytest.raises(InvalidArgumentError):
        mat_random_uniform(2, 2, 0.0, 1.0, seed=-1)


def test_matrices_are_read_only():
    m = mat_random_uniform(2, 2, 0.0, 1.0, seed=3)
    with pytest.raises(ValueError):
        m[0, 0] = 5.0


def test_row_mean_var_examples():
    means, variances = row_mean_var(np.array([[1.0, 2.0, 3.0]]))
    assert means[0] == pytest.approx(2.0)
    assert variances[0] == pytest.approx(2.0 / 3.0)

    means, variances = row_mean_var(np.full((1, 5), 4.25))
    assert means[0] == 4.25
    assert variances[0] == 0.0

    means, variances = row_mean_var(np.array([[1.0, 2.0], [3.0, 5.0]]))
    np.testing.assert_allclose(means, [1.5, 4.0])
    np.testing.assert_allclose(variances, [0.25, 1.0])


@pytest.mark.parametrize("a,b", [(0.1, -5.0), (2.0, 0.0), (10.0, 5.0), (0.5, 3.0)])
def test_row_mean_var_affine(a, b):
    m = mat_random_uniform(6, 32, -3.0, 3.0, seed=11)
    means, variances = row_mean_var(m)
    t_means, t_vars = row_mean_var(a * m + b)
    np.testing.assert_allclose(t_means, a * means + b, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(t_vars, a * a * variances, rtol=1e-12)


def test_as_matrix_validation():
    assert as_matrix([1.0, 2.0]).shape == (1, 2)
    with pytest.raises(ShapeError):
        as_matrix(np.zeros((2, 2, 2)))
    with pytest.raises(InvalidArgumentError):
        as_matrix([[1.0, np.nan]])


def test_derive_seeds_is_stable():
    assert derive_seeds(7, 4) == derive_seeds(7, 4)
    assert len(set(derive_seeds(7, 16))) == 16


def test_frobenius():
    assert frobenius(np.array([[3.0, 4.0]])) == pytest.approx(5.0)
