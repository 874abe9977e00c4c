from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.spatial.distance import cdist, pdist


KernelMode = Literal["full", "zero_diag_then_normalize", "normalize_then_zero_diag"]
KERNEL_MODES: tuple[str, ...] = ("full", "zero_diag_then_normalize", "normalize_then_zero_diag")

# rows whose kernel mass falls below this are treated as underflowed
ROW_FLOOR = 1e-300


@dataclass(frozen=True)
class SmoothingOperator:
    values: np.ndarray
    scale: float | None
    mode: str
    degenerate_rows: np.ndarray = field(repr=False)

    @property
    def has_underflow(self) -> bool:
        return bool(self.degenerate_rows.any())

    @property
    def n_degenerate(self) -> int:
        return int(self.degenerate_rows.sum())

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.values @ values


def as_matrix(x: np.ndarray, name: str = "X") -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array (rows = points), got shape {a.shape}")
    return a


def pairwise_sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """
    Squared Euclidean distances between the rows of A (N×D) and B (R×D).

    Each entry is summed directly over coordinates, so a set against itself gives
    an exactly symmetric matrix with a zero diagonal.
    """
    a = as_matrix(A, "A")
    b = as_matrix(B, "B")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"Column count mismatch: A has {a.shape[1]} columns, B has {b.shape[1]}")
    d2 = cdist(a, b, metric="sqeuclidean")
    return np.maximum(d2, 0.0)


def pairwise_distances_flat(X: np.ndarray) -> np.ndarray:
    """Condensed vector of Euclidean distances over all unordered pairs."""
    return pdist(as_matrix(X), metric="euclidean")


def gaussian_kernel(D2: np.ndarray, sigma: float, denominator_factor: float = 1.0) -> np.ndarray:
    """
    exp(-D2 / (denominator_factor * sigma^2)).

    The pyramid uses factor 1 (e^{-|x-x'|^2/sigma^2}); diffusion maps use factor 2.
    The kernel amplitude is fixed to 1 since row normalization cancels it.
    """
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma <= 0:
        raise ValueError(f"sigma must be positive and finite, got {sigma}")
    if denominator_factor <= 0:
        raise ValueError(f"denominator_factor must be positive, got {denominator_factor}")
    d2 = np.asarray(D2, dtype=float)
    return np.exp(-d2 / (denominator_factor * sigma * sigma))


def _row_normalize(K: np.ndarray, allowed: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    sums = K.sum(axis=1)
    degenerate = ~(sums >= ROW_FLOOR)
    safe = np.where(degenerate, 1.0, sums)
    P = K / safe[:, None]

    if degenerate.any():
        if allowed is None:
            P[degenerate] = 1.0 / K.shape[1]
        else:
            uniform = allowed[degenerate].astype(float)
            uniform /= uniform.sum(axis=1, keepdims=True)
            P[degenerate] = uniform
    return P, degenerate


def smoothing_operator(K: np.ndarray, mode: str = "zero_diag_then_normalize", scale: float | None = None) -> SmoothingOperator:
    """
    Row-normalize a nonnegative kernel matrix into a smoothing (Markov) operator.

    mode
      full                      every row sums to 1
      zero_diag_then_normalize  diagonal removed before normalizing; exact hold-out weights
      normalize_then_zero_diag  normalize, then zero the diagonal (rows sum to 1 - P_ii)
    """
    if mode not in KERNEL_MODES:
        raise ValueError(f"Unknown kernel mode {mode!r}; expected one of {KERNEL_MODES}")

    k = np.array(K, dtype=float, copy=True)
    if k.ndim != 2:
        raise ValueError(f"Kernel must be 2-D, got shape {k.shape}")
    if np.any(k < 0) or not np.all(np.isfinite(k)):
        raise ValueError("Kernel entries must be finite and nonnegative")

    n, r = k.shape
    if mode != "full" and n != r:
        raise ValueError(f"Mode {mode!r} requires a square kernel, got shape {k.shape}")
    if mode != "full" and n < 2:
        raise ValueError(f"Mode {mode!r} needs at least 2 points to drop the diagonal")

    if mode == "full":
        P, degenerate = _row_normalize(k, allowed=None)
    elif mode == "zero_diag_then_normalize":
        np.fill_diagonal(k, 0.0)
        allowed = ~np.eye(n, dtype=bool)
        P, degenerate = _row_normalize(k, allowed=allowed)
    else:
        P, degenerate = _row_normalize(k, allowed=None)
        np.fill_diagonal(P, 0.0)

    P.setflags(write=False)
    degenerate.setflags(write=False)
    return SmoothingOperator(values=P, scale=scale, mode=mode, degenerate_rows=degenerate)


def level_operator(D2: np.ndarray, sigma: float, mode: str) -> SmoothingOperator:
    """Operator at one bandwidth from precomputed squared distances."""
    return smoothing_operator(gaussian_kernel(D2, sigma), mode=mode, scale=sigma)
