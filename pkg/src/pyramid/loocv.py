from __future__ import annotations

import logging

import numpy as np

from src.kernels.operators import gaussian_kernel, pairwise_sq_dists, smoothing_operator
from src.pyramid.alp import AlpParams, check_params, iterate_levels, training_mode, validate_sample


logger = logging.getLogger(__name__)

# the brute-force oracle costs O(L N^3)
ORACLE_MAX_POINTS = 2000


def _check_schedule(sigma0: float, mu: float, n_levels: int) -> None:
    check_params(AlpParams(sigma0=sigma0, mu=mu, max_iter=n_levels))


def exact_loocv_curve(X: np.ndarray, F: np.ndarray, sigma0: float, mu: float = 2.0, n_levels: int = 10) -> np.ndarray:
    """
    Exact leave-one-out error of the standard pyramid after each level.

    For every point p a standard pyramid is trained on the sample without x_p and
    evaluated at x_p. Returns an (n_levels, M) array of mean squared held-out errors.
    """
    _check_schedule(sigma0, mu, n_levels)
    x, f = validate_sample(X, F)
    n, m = f.shape
    if n > ORACLE_MAX_POINTS:
        raise ValueError(
            f"exact_loocv_curve is capped at N={ORACLE_MAX_POINTS} (got {n}); "
            "use alp_train, whose auto-adaptive error approximates the same curve"
        )

    D2 = pairwise_sq_dists(x, x)
    sq_err = np.zeros((n_levels, m))
    idx = np.arange(n)

    for p in range(n):
        keep = idx != p
        D2_train = D2[np.ix_(keep, keep)]
        d2_held = D2[p, keep].reshape(1, -1)
        f_train = f[keep]

        pred = np.zeros(m)
        for state in iterate_levels(D2_train, f_train, sigma0, mu, "full", n_levels):
            row = smoothing_operator(gaussian_kernel(d2_held, state.sigma), mode="full")
            pred = pred + row.apply(state.residual_in)[0]
            sq_err[state.level] += (f[p] - pred) ** 2

    curve = sq_err / n
    logger.info(f"Exact LOOCV oracle over N={n}: argmin per output = {np.argmin(curve, axis=0).tolist()}")
    return curve


def lp_train_error_curve(
    X: np.ndarray,
    F: np.ndarray,
    sigma0: float,
    mu: float = 2.0,
    n_levels: int = 10,
    variant: str = "standard",
    kernel_mode: str = "zero_diag_then_normalize",
) -> np.ndarray:
    """
    Training mean squared error after each of `n_levels` levels, without early stopping.

    The default standard variant shows the overfitting trend (error tends to zero);
    variant="auto_adaptive" gives the full auto-adaptive curve for comparison.
    """
    params = AlpParams(sigma0=sigma0, mu=mu, max_iter=n_levels, variant=variant, kernel_mode=kernel_mode)
    check_params(params)
    x, f = validate_sample(X, F)

    D2 = pairwise_sq_dists(x, x)
    curve = np.empty((n_levels, f.shape[1]))
    for state in iterate_levels(D2, f, sigma0, mu, training_mode(params), n_levels):
        curve[state.level] = np.mean(state.residual_out ** 2, axis=0)
    return curve
