from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.datasets import make_swiss_roll


@dataclass(frozen=True)
class SyntheticSpec:
    n_points: int = 4000
    noise_amplitude: float = 0.05     # eps ~ U[-delta, delta]
    seed: int = 0
    x_min: float = 0.0
    x_max: float = 10.0 * np.pi


def _check_spec(spec: SyntheticSpec) -> None:
    if int(spec.n_points) < 2:
        raise ValueError(f"n_points must be >= 2, got {spec.n_points}")
    if spec.noise_amplitude < 0:
        raise ValueError(f"noise_amplitude must be >= 0, got {spec.noise_amplitude}")
    if not spec.x_max > spec.x_min:
        raise ValueError("x_max must exceed x_min")


def gen_composite_sine(spec: SyntheticSpec) -> tuple[np.ndarray, np.ndarray]:
    """
    f = sin(x) + 0.5 sin(3x) I2(x) + 0.25 sin(9x) I3(x) + eps on an equally spaced grid.

    I2 and I3 indicate the half-open intervals (a + w/3, b] and (a + 2w/3, b], w = b - a,
    so the first third carries one frequency, the second two and the last three.
    """
    _check_spec(spec)
    n = int(spec.n_points)
    x = np.linspace(spec.x_min, spec.x_max, n)

    width = spec.x_max - spec.x_min
    i2 = ((x > spec.x_min + width / 3.0) & (x <= spec.x_max)).astype(float)
    i3 = ((x > spec.x_min + 2.0 * width / 3.0) & (x <= spec.x_max)).astype(float)

    rng = np.random.default_rng(spec.seed)
    eps = rng.uniform(-spec.noise_amplitude, spec.noise_amplitude, size=n)

    f = np.sin(x) + 0.5 * np.sin(3.0 * x) * i2 + 0.25 * np.sin(9.0 * x) * i3 + eps
    return x.reshape(-1, 1), f.reshape(-1, 1)


def odd_even_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """1-based odd positions train, even positions test (0-based: even / odd)."""
    if n < 2:
        raise ValueError(f"Need at least 2 points to split, got {n}")
    idx = np.arange(n)
    return idx[0::2], idx[1::2]


def odd_even_split(x: np.ndarray, f: np.ndarray) -> tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]:
    x = np.asarray(x)
    f = np.asarray(f)
    if x.shape[0] != f.shape[0]:
        raise ValueError("x and f must have the same number of rows")
    train, test = odd_even_indices(x.shape[0])
    return (x[train], f[train]), (x[test], f[test])


def random_split(n: int, train_fraction: float = 0.7, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n_train = int(round(train_fraction * n))
    if n_train < 1 or n_train >= n:
        raise ValueError(f"Split of {n} points at {train_fraction} leaves an empty side")
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def gen_swiss_roll(n: int, noise: float = 0.0, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """
    Swiss roll (t cos t, h, t sin t) with uniform t, h and Gaussian jitter of std `noise`.
    Returns the 3-D points and the intrinsic roll parameter t.
    """
    if int(n) < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if noise < 0:
        raise ValueError(f"noise must be >= 0, got {noise}")
    X, t = make_swiss_roll(n_samples=int(n), noise=float(noise), random_state=int(seed))
    return X, t


SWISS_ROLL_T = (1.5 * np.pi, 4.5 * np.pi)
SWISS_ROLL_HEIGHT = 21.0


def gen_banded_swiss_roll(
    n: int,
    noise: float = 0.0,
    seed: int = 0,
    bands: int = 3,
    gap: float = 0.25,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Swiss roll on the same surface as gen_swiss_roll, with t drawn from `bands`
    equal-width bands that keep the central (1 - gap) share of their width, so the
    bands are separated along the roll. Returns the points, t and each point's band.
    """
    if int(n) < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if noise < 0:
        raise ValueError(f"noise must be >= 0, got {noise}")
    if int(bands) < 1:
        raise ValueError(f"bands must be >= 1, got {bands}")
    if not 0.0 <= gap < 1.0:
        raise ValueError(f"gap must lie in [0, 1), got {gap}")

    rng = np.random.default_rng(seed)
    lo, hi = SWISS_ROLL_T
    width = (hi - lo) / int(bands)
    band = rng.integers(int(bands), size=int(n))
    t = lo + width * (band + gap / 2.0 + (1.0 - gap) * rng.uniform(size=int(n)))
    h = SWISS_ROLL_HEIGHT * rng.uniform(size=int(n))

    X = np.column_stack([t * np.cos(t), h, t * np.sin(t)])
    if noise > 0:
        X = X + noise * rng.standard_normal(size=X.shape)
    return X, t, band
