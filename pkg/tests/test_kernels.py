import numpy as np
import pytest

from src.kernels.operators import (
    gaussian_kernel,
    level_operator,
    pairwise_distances_flat,
    pairwise_sq_dists,
    smoothing_operator,
)


def _points(n=30, d=2, seed=0):
    return np.random.default_rng(seed).normal(size=(n, d))


def test_sq_dists_symmetric_with_zero_diagonal():
    X = _points()
    D2 = pairwise_sq_dists(X, X)
    assert np.array_equal(D2, D2.T)
    assert np.all(np.diag(D2) == 0.0)
    assert np.isclose(D2[0, 1], np.sum((X[0] - X[1]) ** 2))


def test_sq_dists_column_mismatch():
    with pytest.raises(ValueError):
        pairwise_sq_dists(np.zeros((3, 2)), np.zeros((3, 3)))


def test_one_dimensional_input_is_a_column():
    x = np.array([0.0, 1.0, 3.0])
    D2 = pairwise_sq_dists(x, x)
    assert D2.shape == (3, 3)
    assert D2[0, 2] == 9.0
    assert pairwise_distances_flat(x).tolist() == [1.0, 3.0, 2.0]


def test_gaussian_kernel_rejects_bad_sigma():
    for sigma in (0.0, -1.0, np.inf, np.nan):
        with pytest.raises(ValueError):
            gaussian_kernel(np.zeros((2, 2)), sigma)


def test_gaussian_kernel_factor():
    D2 = np.array([[0.0, 2.0]])
    assert np.allclose(gaussian_kernel(D2, 1.0), [[1.0, np.exp(-2.0)]])
    assert np.allclose(gaussian_kernel(D2, 1.0, denominator_factor=2.0), [[1.0, np.exp(-1.0)]])


def test_full_mode_rows_sum_to_one():
    X = _points()
    op = level_operator(pairwise_sq_dists(X, X), 1.0, "full")
    assert np.allclose(op.values.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(np.diag(op.values) > 0)
    assert not op.has_underflow


def test_zero_diag_then_normalize():
    X = _points()
    op = level_operator(pairwise_sq_dists(X, X), 1.0, "zero_diag_then_normalize")
    assert np.all(np.diag(op.values) == 0.0)
    assert np.allclose(op.values.sum(axis=1), 1.0, atol=1e-12)


def test_normalize_then_zero_diag_rows_lose_self_weight():
    X = _points()
    K = gaussian_kernel(pairwise_sq_dists(X, X), 1.0)
    full = smoothing_operator(K, mode="full").values
    op = smoothing_operator(K, mode="normalize_then_zero_diag")
    assert np.all(np.diag(op.values) == 0.0)
    assert np.allclose(op.values.sum(axis=1), 1.0 - np.diag(full), atol=1e-12)


def test_operator_is_read_only():
    X = _points(5)
    op = level_operator(pairwise_sq_dists(X, X), 1.0, "full")
    with pytest.raises(ValueError):
        op.values[0, 0] = 2.0


def test_underflowed_rows_become_uniform_over_other_points():
    x = np.array([[0.0], [10.0], [20.0]])
    op = level_operator(pairwise_sq_dists(x, x), 0.01, "zero_diag_then_normalize")
    assert op.has_underflow
    assert op.n_degenerate == 3
    expected = (np.ones((3, 3)) - np.eye(3)) / 2.0
    assert np.allclose(op.values, expected)


def test_operator_input_validation():
    with pytest.raises(ValueError):
        smoothing_operator(np.ones((2, 3)), mode="zero_diag_then_normalize")
    with pytest.raises(ValueError):
        smoothing_operator(np.array([[1.0, -0.1], [0.2, 1.0]]), mode="full")
    with pytest.raises(ValueError):
        smoothing_operator(np.eye(2), mode="nope")
    with pytest.raises(ValueError):
        smoothing_operator(np.ones((1, 1)), mode="zero_diag_then_normalize")


def test_rectangular_full_operator():
    train = _points(20)
    test = _points(7, seed=1)
    op = level_operator(pairwise_sq_dists(test, train), 0.8, "full")
    assert op.values.shape == (7, 20)
    assert np.allclose(op.values.sum(axis=1), 1.0)


@pytest.mark.parametrize("mode", ["full", "zero_diag_then_normalize", "normalize_then_zero_diag"])
def test_kernel_amplitude_cancels(mode):
    X = _points()
    K = gaussian_kernel(pairwise_sq_dists(X, X), 1.3)
    base = smoothing_operator(K, mode=mode).values
    for c in (1e-3, 3.7, 250.0):
        assert np.allclose(smoothing_operator(c * K, mode=mode).values, base, rtol=0.0, atol=1e-15)


@pytest.mark.parametrize("mode", ["full", "zero_diag_then_normalize"])
def test_row_stochastic_modes_preserve_constants(mode):
    X = _points(40)
    op = level_operator(pairwise_sq_dists(X, X), 0.7, mode)
    assert np.allclose(op.apply(np.full((40, 2), -2.5)), -2.5, rtol=0.0, atol=1e-10)


def test_wider_kernel_is_never_smaller():
    D2 = pairwise_sq_dists(_points(), _points())
    narrow = gaussian_kernel(D2, 0.5)
    wide = gaussian_kernel(D2, 2.0)
    assert np.all(wide >= narrow)
    assert np.all(wide[D2 > 0] > narrow[D2 > 0])
