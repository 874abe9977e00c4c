from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator, Literal, Sequence

import numpy as np
import pandas as pd

from src.kernels.operators import (
    KERNEL_MODES,
    SmoothingOperator,
    as_matrix,
    level_operator,
    pairwise_distances_flat,
    pairwise_sq_dists,
)


logger = logging.getLogger(__name__)

Variant = Literal["standard", "auto_adaptive"]
VARIANTS: tuple[str, ...] = ("standard", "auto_adaptive")


@dataclass(frozen=True)
class AlpParams:
    sigma0: float | None = None               # None -> sigma0_factor * median pairwise distance
    mu: float = 2.0                           # bandwidth divisor per level
    max_iter: int = 50
    variant: str = "auto_adaptive"
    kernel_mode: str = "zero_diag_then_normalize"
    sigma0_factor: float = 2.0
    rtol_floor: float = 1e-24                 # err <= rtol_floor * mean(F^2) counts as converged


@dataclass(frozen=True)
class LevelState:
    level: int
    sigma: float
    operator: SmoothingOperator
    fit: np.ndarray
    residual_in: np.ndarray
    residual_out: np.ndarray


@dataclass(frozen=True)
class TrainReport:
    error_curves: tuple[np.ndarray, ...]
    optimal_iter: np.ndarray
    bandwidths: np.ndarray
    underflow: bool
    stop_reason: str

    @property
    def n_levels(self) -> int:
        return int(len(self.bandwidths))

    def to_frame(self, target_names: Sequence[str] | None = None) -> pd.DataFrame:
        names = list(target_names) if target_names else [f"y{j}" for j in range(len(self.error_curves))]
        out = pd.DataFrame({"level": np.arange(self.n_levels), "sigma": self.bandwidths})
        for name, curve in zip(names, self.error_curves):
            col = np.full(self.n_levels, np.nan)
            col[: len(curve)] = curve
            out[f"err_{name}"] = col
        return out


@dataclass(frozen=True)
class AlpModel:
    train_points: np.ndarray
    sigma0: float
    mu: float
    residuals: np.ndarray                     # (levels, N, M); residuals[0] is the target
    error_curves: tuple[np.ndarray, ...]
    optimal_iter: np.ndarray                  # per output, 0-based index of the last level used
    kernel_mode: str
    variant: str
    feature_names: tuple[str, ...] = field(default=())
    target_names: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        pts = np.array(self.train_points, dtype=float)
        res = np.array(self.residuals, dtype=float)
        opt = np.array(self.optimal_iter, dtype=np.int64).reshape(-1)

        if pts.ndim != 2:
            raise ValueError(f"train_points must be 2-D, got shape {pts.shape}")
        if res.ndim != 3 or res.shape[1] != pts.shape[0]:
            raise ValueError(f"residuals must have shape (levels, {pts.shape[0]}, M), got {res.shape}")
        if opt.shape[0] != res.shape[2]:
            raise ValueError("optimal_iter needs one entry per output column")
        if np.any(opt < 0) or res.shape[0] < int(opt.max()) + 1:
            raise ValueError("residuals do not cover every output's optimal iteration")
        if not self.sigma0 > 0 or not self.mu > 1:
            raise ValueError("sigma0 must be > 0 and mu > 1")

        curves = tuple(np.array(c, dtype=float) for c in self.error_curves)
        for a in (pts, res, opt, *curves):
            a.setflags(write=False)

        object.__setattr__(self, "train_points", pts)
        object.__setattr__(self, "residuals", res)
        object.__setattr__(self, "optimal_iter", opt)
        object.__setattr__(self, "error_curves", curves)
        object.__setattr__(self, "sigma0", float(self.sigma0))
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "target_names", tuple(self.target_names))

    @property
    def n_points(self) -> int:
        return int(self.train_points.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.train_points.shape[1])

    @property
    def n_outputs(self) -> int:
        return int(self.residuals.shape[2])

    @property
    def n_levels(self) -> int:
        return int(self.residuals.shape[0])

    def bandwidth(self, level: int) -> float:
        return self.sigma0 / self.mu ** level


def default_sigma0(X: np.ndarray, factor: float = 2.0) -> float:
    """Median pairwise Euclidean distance of the sample, times `factor`."""
    x = as_matrix(X)
    if x.shape[0] < 2:
        raise ValueError("Need at least 2 points to derive a default sigma0")
    sigma0 = factor * float(np.median(pairwise_distances_flat(x)))
    if not sigma0 > 0:
        raise ValueError("All training points coincide; pass an explicit sigma0")
    return sigma0


def check_params(params: AlpParams) -> None:
    if params.variant not in VARIANTS:
        raise ValueError(f"Unknown variant {params.variant!r}; expected one of {VARIANTS}")
    if params.kernel_mode not in KERNEL_MODES:
        raise ValueError(f"Unknown kernel_mode {params.kernel_mode!r}; expected one of {KERNEL_MODES}")
    if params.sigma0 is not None and not (np.isfinite(params.sigma0) and params.sigma0 > 0):
        raise ValueError(f"sigma0 must be > 0, got {params.sigma0}")
    if not (np.isfinite(params.mu) and params.mu > 1):
        raise ValueError(f"mu must be > 1, got {params.mu}")
    if int(params.max_iter) < 1:
        raise ValueError(f"max_iter must be >= 1, got {params.max_iter}")
    if params.sigma0_factor <= 0:
        raise ValueError("sigma0_factor must be positive")


def training_mode(params: AlpParams) -> str:
    # the standard pyramid always smooths with the full operator
    return "full" if params.variant == "standard" else params.kernel_mode


def validate_sample(X: np.ndarray, F: np.ndarray, min_points: int = 3) -> tuple[np.ndarray, np.ndarray]:
    x = as_matrix(X, "X")
    f = as_matrix(F, "F")
    if x.shape[0] == 0:
        raise ValueError("Empty sample")
    if x.shape[0] < min_points:
        raise ValueError(f"Need at least {min_points} training points, got {x.shape[0]}")
    if f.shape[0] != x.shape[0]:
        raise ValueError(f"Targets have {f.shape[0]} rows but X has {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("X contains non-finite values")
    if not np.all(np.isfinite(f)):
        raise ValueError("Targets contain non-finite values")
    return x, f


def iterate_levels(D2: np.ndarray, F: np.ndarray, sigma0: float, mu: float, mode: str, n_levels: int) -> Iterator[LevelState]:
    """
    Run the pyramid recursion on precomputed squared distances:
    fit_l = fit_{l-1} + P_l d_l, d_{l+1} = F - fit_l, with P_l at bandwidth sigma0 / mu^l.
    """
    fit = np.zeros_like(F, dtype=float)
    residual = np.array(F, dtype=float, copy=True)
    for level in range(n_levels):
        sigma = sigma0 / mu ** level
        op = level_operator(D2, sigma, mode)
        fit = fit + op.apply(residual)
        new_residual = F - fit
        yield LevelState(level, sigma, op, fit, residual, new_residual)
        residual = new_residual


def alp_train(
    X: np.ndarray,
    F: np.ndarray,
    params: AlpParams = AlpParams(),
    feature_names: Sequence[str] = (),
    target_names: Sequence[str] = (),
) -> tuple[AlpModel, TrainReport]:
    """
    Train a (auto-adaptive) Laplacian pyramid.

    Every output column shares the per-level operator but keeps its own stopping
    level. Once an output's error has started to fall, the output stops at the first
    level where it fails to decrease strictly; rises before that first fall (coarse
    scales flattening the target) do not stop it. Its optimal level is the argmin of
    its error curve. The loop ends once no output is active, at max_iter, or on
    kernel underflow. With variant="auto_adaptive" the training error approximates
    the leave-one-out error.
    """
    check_params(params)
    x, f = validate_sample(X, F)
    sigma0 = float(params.sigma0) if params.sigma0 is not None else default_sigma0(x, params.sigma0_factor)
    mode = training_mode(params)

    n, m = f.shape
    D2 = pairwise_sq_dists(x, x)
    floor = params.rtol_floor * np.mean(f ** 2, axis=0)

    best_err = np.full(m, np.inf)
    best_level = np.zeros(m, dtype=np.int64)
    prev_err = np.full(m, np.inf)
    falling = np.zeros(m, dtype=bool)
    active = np.ones(m, dtype=bool)
    curves: list[list[float]] = [[] for _ in range(m)]
    residuals = [f.copy()]
    bandwidths: list[float] = []
    underflow = False
    stop_reason = "max_iter"

    logger.info(f"Training {params.variant} pyramid: N={n} M={m} sigma0={sigma0:.6g} mu={params.mu} mode={mode}")

    for state in iterate_levels(D2, f, sigma0, params.mu, mode, int(params.max_iter)):
        op = state.operator
        if op.has_underflow:
            if state.level == 0 and op.degenerate_rows.all():
                raise ValueError(
                    f"Kernel underflow at the initial scale sigma0={sigma0:.6g}: every row vanished. "
                    "Use a larger sigma0."
                )
            if state.level == 0:
                logger.warning(f"{op.n_degenerate} kernel rows underflowed at sigma0={sigma0:.6g}; replaced by uniform rows")
            else:
                underflow = True
                stop_reason = "kernel_underflow"
                rows = np.flatnonzero(op.degenerate_rows)
                logger.info(
                    f"Kernel underflow at level {state.level} (sigma={state.sigma:.3e}) in {rows.size} of {n} rows "
                    f"{rows[:20].tolist()}{' ...' if rows.size > 20 else ''}; stopping every output"
                )
                break

        err = np.mean(state.residual_out ** 2, axis=0)
        bandwidths.append(state.sigma)
        residuals.append(state.residual_out)

        for j in np.flatnonzero(active):
            curves[j].append(float(err[j]))
            # strict: ties keep the earlier, smoother level
            if err[j] < best_err[j]:
                best_err[j] = err[j]
                best_level[j] = state.level
            if err[j] <= floor[j]:
                active[j] = False
            elif err[j] < prev_err[j]:
                falling[j] = falling[j] or state.level > 0
            elif falling[j]:
                active[j] = False
            prev_err[j] = err[j]

        logger.debug(f"level={state.level} sigma={state.sigma:.6g} err={np.array2string(err, precision=6)}")

        if not active.any():
            stop_reason = "converged"
            break

    keep = int(best_level.max()) + 1
    model = AlpModel(
        train_points=x,
        sigma0=sigma0,
        mu=params.mu,
        residuals=np.stack(residuals[:keep]),
        error_curves=tuple(np.asarray(c) for c in curves),
        optimal_iter=best_level,
        kernel_mode=mode,
        variant=params.variant,
        feature_names=tuple(feature_names),
        target_names=tuple(target_names),
    )
    report = TrainReport(
        error_curves=model.error_curves,
        optimal_iter=model.optimal_iter,
        bandwidths=np.asarray(bandwidths),
        underflow=underflow,
        stop_reason=stop_reason,
    )
    logger.info(f"Stopped ({stop_reason}) after {report.n_levels} levels; optimal_iter={best_level.tolist()}")
    return model, report


def _test_operators(model: AlpModel, X_test: np.ndarray, n_levels: int) -> Iterator[tuple[int, SmoothingOperator]]:
    xt = as_matrix(X_test, "X_test")
    if xt.shape[1] != model.n_features:
        raise ValueError(f"X_test has {xt.shape[1]} columns, model was trained on {model.n_features}")
    if not np.all(np.isfinite(xt)):
        raise ValueError("X_test contains non-finite values")

    D2 = pairwise_sq_dists(xt, model.train_points)
    for level in range(n_levels):
        op = level_operator(D2, model.bandwidth(level), "full")
        if op.has_underflow:
            logger.warning(f"{op.n_degenerate} test rows underflowed at level {level}; using uniform weights")
        yield level, op


def alp_predict(model: AlpModel, X_test: np.ndarray) -> np.ndarray:
    """
    Evaluate the model at new points: y_m = sum_{l <= optimal_iter[m]} P_l(X_test, X_train) d_l[:, m],
    with full (diagonal-keeping) operators at bandwidth sigma0 / mu^l.
    """
    n_test = as_matrix(X_test, "X_test").shape[0]
    pred = np.zeros((n_test, model.n_outputs))
    last = int(model.optimal_iter.max())
    for level, op in _test_operators(model, X_test, last + 1):
        active = model.optimal_iter >= level
        contrib = op.apply(model.residuals[level])
        pred[:, active] += contrib[:, active]
    return pred


def alp_staged_predict(model: AlpModel, X_test: np.ndarray) -> np.ndarray:
    """Cumulative predictions after each stored level, shape (levels, N_test, M)."""
    n_test = as_matrix(X_test, "X_test").shape[0]
    out = np.empty((model.n_levels, n_test, model.n_outputs))
    pred = np.zeros((n_test, model.n_outputs))
    for level, op in _test_operators(model, X_test, model.n_levels):
        pred = pred + op.apply(model.residuals[level])
        out[level] = pred
    return out


def influence_profile(model: AlpModel, x: np.ndarray, n_levels: int | None = None) -> np.ndarray:
    """Weights each training point gets for query `x` at every level, shape (levels, N)."""
    point = np.asarray(x, dtype=float).reshape(1, -1)
    levels = model.n_levels if n_levels is None else int(n_levels)
    return np.stack([op.values[0] for _, op in _test_operators(model, point, levels)])
