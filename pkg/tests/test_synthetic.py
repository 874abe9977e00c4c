import numpy as np
import pytest

from src.data.synthetic import (
    SyntheticSpec,
    gen_banded_swiss_roll,
    gen_composite_sine,
    gen_swiss_roll,
    odd_even_indices,
    odd_even_split,
    random_split,
)


def test_grid_and_shapes():
    x, f = gen_composite_sine(SyntheticSpec(n_points=4000, noise_amplitude=0.05, seed=0))
    assert x.shape == (4000, 1) and f.shape == (4000, 1)
    assert x[0, 0] == 0.0
    assert np.isclose(x[-1, 0], 10 * np.pi)
    assert np.allclose(np.diff(x[:, 0]), 10 * np.pi / 3999)


def test_noise_free_bands():
    x, f = gen_composite_sine(SyntheticSpec(n_points=3000, noise_amplitude=0.0))
    x, f = x[:, 0], f[:, 0]
    first = x <= 10 * np.pi / 3
    assert np.array_equal(f[first], np.sin(x[first]))
    second = (x > 10 * np.pi / 3) & (x <= 20 * np.pi / 3)
    assert np.allclose(f[second], np.sin(x[second]) + 0.5 * np.sin(3 * x[second]))
    third = x > 20 * np.pi / 3
    assert np.allclose(f[third], np.sin(x[third]) + 0.5 * np.sin(3 * x[third]) + 0.25 * np.sin(9 * x[third]))


def test_value_at_five_pi_is_zero():
    x, f = gen_composite_sine(SyntheticSpec(n_points=3, noise_amplitude=0.0))
    assert x[1, 0] == 5 * np.pi
    assert abs(f[1, 0]) < 1e-12


def test_noise_is_bounded_and_seeded():
    spec = SyntheticSpec(n_points=2000, noise_amplitude=0.25, seed=7)
    _, f = gen_composite_sine(spec)
    _, clean = gen_composite_sine(SyntheticSpec(n_points=2000, noise_amplitude=0.0, seed=7))
    eps = f - clean
    assert np.all(np.abs(eps) <= 0.25 + 1e-12)
    assert np.isclose(np.sqrt(np.mean(eps ** 2)), 0.25 / np.sqrt(3), rtol=0.05)
    _, again = gen_composite_sine(spec)
    assert np.array_equal(f, again)


def test_odd_even_split():
    tr, te = odd_even_indices(7)
    assert tr.tolist() == [0, 2, 4, 6]
    assert te.tolist() == [1, 3, 5]
    x, f = gen_composite_sine(SyntheticSpec(n_points=4000))
    (xtr, _), (xte, _) = odd_even_split(x, f)
    assert xtr.shape[0] == xte.shape[0] == 2000


def test_random_split_disjoint_and_sorted():
    tr, te = random_split(600, 0.7, seed=3)
    assert tr.size == 420 and te.size == 180
    assert np.intersect1d(tr, te).size == 0
    assert np.array_equal(np.sort(np.concatenate([tr, te])), np.arange(600))
    assert np.all(np.diff(tr) > 0)
    with pytest.raises(ValueError):
        random_split(10, 1.0)


def test_swiss_roll():
    X, t = gen_swiss_roll(300, 0.0, seed=0)
    assert X.shape == (300, 3) and t.shape == (300,)
    assert np.allclose(X[:, 0], t * np.cos(t))
    assert np.allclose(X[:, 2], t * np.sin(t))


def test_parameter_checks():
    with pytest.raises(ValueError):
        gen_composite_sine(SyntheticSpec(n_points=1))
    with pytest.raises(ValueError):
        gen_composite_sine(SyntheticSpec(noise_amplitude=-0.1))
    with pytest.raises(ValueError):
        gen_swiss_roll(10, noise=-1.0)


def test_banded_swiss_roll_keeps_gaps_between_bands():
    X, t, band = gen_banded_swiss_roll(600, 0.0, seed=0, bands=3, gap=0.25)
    assert X.shape == (600, 3) and t.shape == (600,) and band.shape == (600,)
    assert set(band.tolist()) == {0, 1, 2}
    assert np.allclose(X[:, 0], t * np.cos(t))
    assert np.all((X[:, 1] >= 0.0) & (X[:, 1] <= 21.0))
    width = np.pi
    for b in range(3):
        tb = t[band == b]
        assert tb.min() >= 1.5 * np.pi + width * (b + 0.125) - 1e-9
        assert tb.max() <= 1.5 * np.pi + width * (b + 0.875) + 1e-9
    assert np.array_equal(gen_banded_swiss_roll(600, 0.0, seed=0)[0], X)
    with pytest.raises(ValueError):
        gen_banded_swiss_roll(10, gap=1.0)
