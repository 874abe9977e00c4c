from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.kernels.operators import as_matrix, gaussian_kernel, pairwise_distances_flat, pairwise_sq_dists


logger = logging.getLogger(__name__)

# dense eigendecomposition is O(N^3); beyond this the cost is impractical
DM_MAX_POINTS = 5000


@dataclass(frozen=True)
class DmConfig:
    sigma: float | None = None        # None -> percentile of pairwise distances
    alpha: float = 1.0                # density normalization exponent
    t: int = 1                        # diffusion time
    delta: float = 0.1                # spectral cutoff fraction of |lambda_1|
    sigma_percentile: float = 50.0
    max_points: int = DM_MAX_POINTS


@dataclass(frozen=True)
class DiffusionOperators:
    W: np.ndarray
    degrees: np.ndarray
    W_alpha: np.ndarray
    alpha_degrees: np.ndarray
    markov: np.ndarray


@dataclass(frozen=True)
class DiffusionEmbedding:
    spectrum: np.ndarray          # every eigenvalue, descending by magnitude; spectrum[0] == 1
    basis: np.ndarray             # matching right eigenvectors as columns, unit norm in L2(phi_0)
    dim: int
    degrees: np.ndarray
    alpha_degrees: np.ndarray
    sigma: float
    config: DmConfig
    train_points: np.ndarray

    @property
    def n_points(self) -> int:
        return int(self.train_points.shape[0])

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum[: self.dim + 1]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.basis[:, : self.dim + 1]

    @property
    def coordinates(self) -> np.ndarray:
        lam = self.spectrum[1 : self.dim + 1] ** self.config.t
        return self.basis[:, 1 : self.dim + 1] * lam

    @property
    def full_coordinates(self) -> np.ndarray:
        lam = self.spectrum[1:] ** self.config.t
        return self.basis[:, 1:] * lam

    @property
    def stationary(self) -> np.ndarray:
        return self.alpha_degrees / self.alpha_degrees.sum()


def check_config(config: DmConfig) -> None:
    if config.sigma is not None and not (np.isfinite(config.sigma) and config.sigma > 0):
        raise ValueError(f"sigma must be > 0, got {config.sigma}")
    if not 0.0 <= config.alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {config.alpha}")
    if int(config.t) != config.t or config.t < 1:
        raise ValueError(f"t must be a positive integer, got {config.t}")
    if not 0.0 < config.delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {config.delta}")
    if not 0.0 < config.sigma_percentile <= 100.0:
        raise ValueError(f"sigma_percentile must lie in (0, 100], got {config.sigma_percentile}")


def default_dm_sigma(X: np.ndarray, percentile: float = 50.0) -> float:
    """Percentile of the Euclidean distances between all pairs of sample points."""
    dists = pairwise_distances_flat(X)
    if dists.size == 0:
        raise ValueError("Need at least 2 points to derive a kernel bandwidth")
    return float(np.percentile(dists, percentile))


def diffusion_operators(D2: np.ndarray, sigma: float, alpha: float) -> DiffusionOperators:
    W = gaussian_kernel(D2, sigma, denominator_factor=2.0)
    g = W.sum(axis=1)
    g_a = g ** alpha
    W_alpha = W / np.outer(g_a, g_a)
    alpha_degrees = W_alpha.sum(axis=1)
    markov = W_alpha / alpha_degrees[:, None]
    return DiffusionOperators(W=W, degrees=g, W_alpha=W_alpha, alpha_degrees=alpha_degrees, markov=markov)


def retained_dimension(spectrum: np.ndarray, delta: float) -> int:
    """d = max{l >= 1 : |lambda_l| > delta |lambda_1|} for a magnitude-sorted spectrum."""
    if spectrum.size < 2:
        raise ValueError("Spectrum has no nontrivial eigenvalue")
    lam1 = abs(spectrum[1])
    if lam1 == 0.0:
        raise ValueError("First nontrivial eigenvalue is zero; the kernel bandwidth is too small")
    above = np.flatnonzero(np.abs(spectrum[1:]) > delta * lam1)
    return int(above.max()) + 1


def dm_fit(X: np.ndarray, config: DmConfig = DmConfig()) -> DiffusionEmbedding:
    """
    Diffusion Maps embedding.

    The alpha-normalized Markov matrix D^{-1} W_alpha is diagonalized through its
    symmetric conjugate D^{-1/2} W_alpha D^{-1/2}, so the spectrum is real. Right
    eigenvectors are recovered as D^{-1/2} v, scaled to unit norm in L2(phi_0) and
    signed so their largest-magnitude entry is positive.
    """
    check_config(config)
    x = as_matrix(X).copy()
    n = x.shape[0]
    if n < 3:
        raise ValueError(f"Diffusion maps need at least 3 points, got {n}")
    if n > config.max_points:
        raise ValueError(f"N={n} exceeds the dense eigensolver cap of {config.max_points} points")
    if not np.all(np.isfinite(x)):
        raise ValueError("X contains non-finite values")

    D2 = pairwise_sq_dists(x, x)
    if not np.any(D2 > 0):
        raise ValueError("All points are identical (zero spread); nothing to embed")

    sigma = float(config.sigma) if config.sigma is not None else default_dm_sigma(x, config.sigma_percentile)
    ops = diffusion_operators(D2, sigma, config.alpha)

    inv_sqrt = 1.0 / np.sqrt(ops.alpha_degrees)
    S = inv_sqrt[:, None] * ops.W_alpha * inv_sqrt[None, :]
    S = 0.5 * (S + S.T)
    try:
        vals, vecs = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"Eigendecomposition failed: {exc}") from exc

    order = np.argsort(-np.abs(vals), kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]

    psi = np.sqrt(ops.alpha_degrees.sum()) * inv_sqrt[:, None] * vecs
    lead = np.argmax(np.abs(psi), axis=0)
    signs = np.sign(psi[lead, np.arange(n)])
    signs[signs == 0] = 1.0
    psi = psi * signs

    dim = retained_dimension(vals, config.delta)
    logger.info(f"DM fit: N={n} sigma={sigma:.6g} alpha={config.alpha} t={config.t} delta={config.delta} -> d={dim}")
    logger.debug(f"Leading eigenvalues: {np.array2string(vals[: dim + 2], precision=6)}")

    for a in (vals, psi, ops.degrees, ops.alpha_degrees, x):
        a.setflags(write=False)

    return DiffusionEmbedding(
        spectrum=vals,
        basis=psi,
        dim=dim,
        degrees=ops.degrees,
        alpha_degrees=ops.alpha_degrees,
        sigma=sigma,
        config=config,
        train_points=x,
    )


def diffusion_distance(emb: DiffusionEmbedding, i: int, j: int, use_full_spectrum: bool = False) -> float:
    """Squared t-step diffusion distance sum_k lambda_k^{2t} (psi_k[i] - psi_k[j])^2 over k >= 1."""
    n = emb.n_points
    for idx in (i, j):
        if not 0 <= int(idx) < n:
            raise IndexError(f"Point index {idx} out of range for {n} points")
    stop = emb.spectrum.size if use_full_spectrum else emb.dim + 1
    lam = emb.spectrum[1:stop]
    diff = emb.basis[int(i), 1:stop] - emb.basis[int(j), 1:stop]
    return float(np.sum(lam ** (2 * emb.config.t) * diff ** 2))
