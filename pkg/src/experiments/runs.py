from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict

import numpy as np
import pandas as pd

from src.common.config import ExperimentConfig
from src.data.quality import standardize
from src.data.synthetic import (
    SyntheticSpec,
    gen_banded_swiss_roll,
    gen_composite_sine,
    gen_swiss_roll,
    odd_even_indices,
    odd_even_split,
    random_split,
)
from src.eval.clustering import cluster_agreement, kmeans
from src.eval.metrics import curves_to_frame, regression_metrics
from src.manifold.diffusion import dm_fit
from src.manifold.embedding_store import coordinates_frame
from src.manifold.extension import dm_extend, two_stage_regression
from src.pyramid.alp import alp_predict, alp_staged_predict, alp_train, default_sigma0
from src.pyramid.loocv import exact_loocv_curve, lp_train_error_curve


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentResult:
    name: str
    summary: Dict[str, Any]
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)


def _opt(opts: dict, key: str, default):
    return type(default)(opts.get(key, default))


def _sine_run(cfg: ExperimentConfig, n_points: int, noise: float, seed: int) -> dict:
    x, f = gen_composite_sine(SyntheticSpec(n_points=n_points, noise_amplitude=noise, seed=seed))
    _, f_clean = gen_composite_sine(SyntheticSpec(n_points=n_points, noise_amplitude=0.0, seed=seed))
    (x_tr, f_tr), (x_te, f_te) = odd_even_split(x, f)
    _, test_idx = odd_even_indices(x.shape[0])
    clean_te = f_clean[test_idx]

    model, report = alp_train(x_tr, f_tr, cfg.alp, feature_names=["x"], target_names=["f"])
    pred = alp_predict(model, x_te)
    return {
        "model": model,
        "report": report,
        "x_test": x_te,
        "f_test": f_te,
        "clean_test": clean_te,
        "pred": pred,
        "metrics": regression_metrics(f_te, pred),
        "clean_metrics": regression_metrics(clean_te, pred),
    }


def _sine_experiment(name: str, default_noise: float) -> Callable[[ExperimentConfig], ExperimentResult]:
    def run(cfg: ExperimentConfig) -> ExperimentResult:
        opts = cfg.experiment_options(name)
        n_points = _opt(opts, "n_points", 4000)
        noise = _opt(opts, "noise", default_noise)

        r = _sine_run(cfg, n_points, noise, cfg.seed)
        model, report = r["model"], r["report"]
        k = int(model.optimal_iter[0])
        summary = {
            "n_train": model.n_points,
            "n_test": int(r["x_test"].shape[0]),
            "noise_amplitude": noise,
            "noise_rms": noise / np.sqrt(3.0),
            "sigma0": model.sigma0,
            "mu": model.mu,
            "optimal_iter": k,
            "optimal_sigma": model.bandwidth(k),
            "stop_reason": report.stop_reason,
            "train_error_at_optimum": float(report.error_curves[0][k]),
            "test_rmse": r["metrics"]["rmse"],
            "test_rmse_vs_clean": r["clean_metrics"]["rmse"],
        }
        predictions = pd.DataFrame(
            {
                "x": r["x_test"][:, 0],
                "f": r["f_test"][:, 0],
                "f_clean": r["clean_test"][:, 0],
                "prediction": r["pred"][:, 0],
            }
        )
        staged, staged_rmse = _staged_tables(model, r)
        tables = {
            "error_curve": report.to_frame(["f"]),
            "predictions": predictions,
            "staged_predictions": staged,
            "staged_rmse": staged_rmse,
        }
        return ExperimentResult(name, summary, tables)

    return run


def _staged_tables(model, r: dict) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Test-set approximation after every stored level, and its error against noisy and clean targets."""
    stages = alp_staged_predict(model, r["x_test"])[:, :, 0]
    staged = pd.DataFrame({"x": r["x_test"][:, 0], "f_clean": r["clean_test"][:, 0]})
    rows = []
    for level, pred in enumerate(stages):
        staged[f"level_{level}"] = pred
        rows.append(
            {
                "level": level,
                "sigma": model.bandwidth(level),
                "rmse": regression_metrics(r["f_test"][:, 0], pred)["rmse"],
                "rmse_vs_clean": regression_metrics(r["clean_test"][:, 0], pred)["rmse"],
            }
        )
    return staged, pd.DataFrame(rows)


def run_noise_comparison(cfg: ExperimentConfig) -> ExperimentResult:
    opts = cfg.experiment_options("noise-comparison")
    replicates = _opt(opts, "replicates", 20)
    n_points = _opt(opts, "n_points", 4000)
    small = _opt(opts, "small_noise", 0.05)
    large = _opt(opts, "large_noise", 0.25)

    rows = []
    for r in range(replicates):
        seed = cfg.seed + r
        a = _sine_run(cfg, n_points, small, seed)
        b = _sine_run(cfg, n_points, large, seed)
        rows.append(
            {
                "replicate": r,
                "seed": seed,
                "iter_small_noise": int(a["model"].optimal_iter[0]),
                "iter_large_noise": int(b["model"].optimal_iter[0]),
                "rmse_small_noise": a["metrics"]["rmse"],
                "rmse_large_noise": b["metrics"]["rmse"],
            }
        )
        logger.debug(f"replicate {r}: {rows[-1]}")
    table = pd.DataFrame(rows)
    med_small = float(table["iter_small_noise"].median())
    med_large = float(table["iter_large_noise"].median())
    summary = {
        "replicates": replicates,
        "small_noise": small,
        "large_noise": large,
        "median_iter_small_noise": med_small,
        "median_iter_large_noise": med_large,
        "large_noise_stops_no_later": bool(med_large <= med_small),
    }
    return ExperimentResult("noise-comparison", summary, {"replicates": table})


def run_loocv_oracle(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Compare, on several small seeded samples, the auto-adaptive training error, the
    exact leave-one-out error and the standard pyramid's training error level by level.

    The default ladder (one period of the sine, mu = 8, four levels) puts the
    leave-one-out minimum at level 1, where the auto-adaptive error tracks it closely;
    deeper minima on the halving ladder are overestimated by the auto-adaptive error.
    An explicit alp.sigma0 overrides sigma0_factor.
    """
    opts = cfg.experiment_options("loocv-oracle")
    instances = _opt(opts, "instances", 10)
    n_points = _opt(opts, "n_points", 100)
    noise = _opt(opts, "noise", 1.25)
    n_levels = _opt(opts, "n_levels", 4)
    x_max = _opt(opts, "x_max", 2.0 * np.pi)
    mu = _opt(opts, "mu", 8.0)
    factor = _opt(opts, "sigma0_factor", 1.5)
    kernel_mode = str(opts.get("kernel_mode", cfg.alp.kernel_mode))

    rows, curve_tables = [], []
    for i in range(instances):
        seed = cfg.seed + i
        x, f = gen_composite_sine(SyntheticSpec(n_points=n_points, noise_amplitude=noise, seed=seed, x_max=x_max))
        sigma0 = cfg.alp.sigma0 if cfg.alp.sigma0 is not None else default_sigma0(x, factor)

        alp_curve = lp_train_error_curve(x, f, sigma0, mu, n_levels, variant="auto_adaptive", kernel_mode=kernel_mode)[:, 0]
        loo_curve = exact_loocv_curve(x, f, sigma0, mu, n_levels)[:, 0]
        lp_curve = lp_train_error_curve(x, f, sigma0, mu, n_levels, variant="standard")[:, 0]

        k_alp = int(np.argmin(alp_curve))
        k_loo = int(np.argmin(loo_curve))
        rel_gap = float(abs(alp_curve[k_loo] - loo_curve[k_loo]) / loo_curve[k_loo])
        rows.append(
            {
                "instance": i,
                "seed": seed,
                "sigma0": sigma0,
                "argmin_alp": k_alp,
                "argmin_loocv": k_loo,
                "match": k_alp == k_loo,
                "relative_gap_at_min": rel_gap,
            }
        )

        frame = curves_to_frame(
            {"alp_train": alp_curve, "exact_loocv": loo_curve, "lp_train": lp_curve},
            sigmas=[sigma0 / mu ** l for l in range(n_levels)],
        )
        frame.insert(0, "instance", i)
        curve_tables.append(frame)

    table = pd.DataFrame(rows)
    matched = table[table["match"]]
    summary = {
        "instances": instances,
        "n_points": n_points,
        "noise_amplitude": noise,
        "x_max": x_max,
        "mu": mu,
        "sigma0_factor": factor,
        "kernel_mode": kernel_mode,
        "n_levels": n_levels,
        "argmin_matches": int(table["match"].sum()),
        "max_relative_gap_when_matched": float(matched["relative_gap_at_min"].max()) if len(matched) else float("nan"),
    }
    return ExperimentResult("loocv-oracle", summary, {"instances": table, "curves": pd.concat(curve_tables, ignore_index=True)})


def _longest_decreasing_run(curve: np.ndarray) -> int:
    """Longest stretch of consecutive strictly decreasing steps."""
    best = run = 0
    for step_down in np.diff(curve) < 0:
        run = run + 1 if step_down else 0
        best = max(best, run)
    return best


def run_residual_decay(cfg: ExperimentConfig) -> ExperimentResult:
    """Standard pyramid on noise-free sin(x): the training error keeps shrinking as the scale refines."""
    opts = cfg.experiment_options("residual-decay")
    n_points = _opt(opts, "n_points", 500)
    n_levels = _opt(opts, "n_levels", 20)
    check_level = _opt(opts, "check_level", 15)

    x = np.linspace(0.0, 10.0 * np.pi, n_points).reshape(-1, 1)
    f = np.sin(x)
    sigma0 = cfg.alp.sigma0 if cfg.alp.sigma0 is not None else default_sigma0(x, cfg.alp.sigma0_factor)
    curve = lp_train_error_curve(x, f, sigma0, cfg.alp.mu, n_levels, variant="standard")[:, 0]

    summary = {
        "n_points": n_points,
        "sigma0": sigma0,
        "longest_decreasing_run": _longest_decreasing_run(curve),
        "check_level": check_level,
        "error_at_check_level": float(curve[check_level - 1]),
        "final_error": float(curve[-1]),
    }
    table = curves_to_frame({"lp_train": curve}, sigmas=[sigma0 / cfg.alp.mu ** l for l in range(n_levels)])
    return ExperimentResult("residual-decay", summary, {"error_curve": table})


def _swiss_roll_split(cfg: ExperimentConfig, opts: dict, default_bands: int = 0):
    """Seeded roll (banded when `bands` > 0), its random split, optionally standardized with training statistics."""
    n = _opt(opts, "n_points", 600)
    noise = _opt(opts, "noise", 0.0)
    frac = _opt(opts, "train_fraction", 0.7)
    bands = _opt(opts, "bands", default_bands)
    if bands > 0:
        X, t, band = gen_banded_swiss_roll(n, noise, cfg.seed, bands=bands, gap=_opt(opts, "band_gap", 0.25))
    else:
        X, t = gen_swiss_roll(n, noise, cfg.seed)
        band = None
    train_idx, test_idx = random_split(n, frac, cfg.seed)
    if _opt(opts, "standardize", False):
        _, _, scaler = standardize(X[train_idx])
        X = scaler.transform(X)
    return X, t, band, train_idx, test_idx


def _dm_config(cfg: ExperimentConfig, opts: dict):
    # the roll needs a scale below the gap between its layers; null falls back to cfg.dm
    sigma = opts.get("dm_sigma", 1.5)
    return replace(cfg.dm, sigma=float(sigma)) if sigma is not None else cfg.dm


def run_dm_cluster_agreement(cfg: ExperimentConfig) -> ExperimentResult:
    """
    K-means on the test points' diffusion coordinates, once from the full-sample
    embedding and once from the train embedding extended to the test points; the
    label-matched agreement measures how well the extension reproduces the embedding.
    K clusters are found in the first K - 1 coordinates unless n_coordinates is set.
    """
    opts = cfg.experiment_options("dm-cluster-agreement")
    X, t, band, train_idx, test_idx = _swiss_roll_split(cfg, opts, default_bands=3)
    dm_cfg = _dm_config(cfg, opts)
    K = cfg.eval.n_clusters

    full = dm_fit(X, dm_cfg)
    train = dm_fit(X[train_idx], dm_cfg)
    q = min(_opt(opts, "n_coordinates", max(K - 1, 1)), full.dim, train.dim)

    ref_coords = full.coordinates[test_idx, :q]
    ext_coords = dm_extend(train, X[test_idx], cfg.alp)[:, :q]

    ref = kmeans(ref_coords, K, seed=cfg.seed, max_iter=cfg.eval.kmeans_max_iter, n_init=cfg.eval.kmeans_n_init)
    pred = kmeans(ext_coords, K, seed=cfg.seed, max_iter=cfg.eval.kmeans_max_iter, n_init=cfg.eval.kmeans_n_init)
    cm = cluster_agreement(ref.labels, pred.labels, K)

    summary = {
        "n_train": int(train_idx.size),
        "n_test": int(test_idx.size),
        "dim_full": full.dim,
        "dim_train": train.dim,
        "coordinates_used": q,
        "sigma_full": full.sigma,
        "sigma_train": train.sigma,
        "accuracy": cm.accuracy,
        "confusion": cm.counts.tolist(),
    }
    extra = {
        "t": t[test_idx],
        "label_full": ref.labels,
        "label_extended": cm.relabel(pred.labels),
    }
    if band is not None and int(band.max()) < K:
        summary["band_accuracy_full"] = cluster_agreement(band[test_idx], ref.labels, K).accuracy
        summary["band_accuracy_extended"] = cluster_agreement(band[test_idx], pred.labels, K).accuracy
        extra["band"] = band[test_idx]
    coords = coordinates_frame(ext_coords, extra=extra)
    for k in range(q):
        coords[f"psi_{k + 1}_full"] = ref_coords[:, k]
    spectrum = pd.DataFrame({"index": np.arange(full.dim + 1), "lambda_full": full.eigenvalues})
    confusion = cm.to_frame().reset_index().rename(columns={"index": "reference"})
    return ExperimentResult(
        "dm-cluster-agreement",
        summary,
        {"confusion": confusion, "coordinates": coords, "spectrum": spectrum},
    )


def run_dm_regression(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Predict the roll parameter of held-out swiss-roll points in three ways:
    full_sample embeds train and test points together and fits the pyramid only from
    coordinates to target; two_stage embeds the training points and extends the
    coordinates before the target pyramid; direct regresses on the raw points.
    """
    opts = cfg.experiment_options("dm-regression")
    X, t, _, train_idx, test_idx = _swiss_roll_split(cfg, opts)
    dm_cfg = _dm_config(cfg, opts)
    emb = dm_fit(X[train_idx], dm_cfg)

    result = two_stage_regression(emb, t[train_idx], X[test_idx], cfg.alp, cfg.alp)

    full = dm_fit(X, dm_cfg)
    full_model, _ = alp_train(full.coordinates[train_idx], t[train_idx], cfg.alp)
    full_sample = alp_predict(full_model, full.coordinates[test_idx])

    direct_model, _ = alp_train(X[train_idx], t[train_idx], cfg.alp)
    direct = alp_predict(direct_model, X[test_idx])

    m_two = regression_metrics(t[test_idx], result.predictions)
    m_full = regression_metrics(t[test_idx], full_sample)
    m_direct = regression_metrics(t[test_idx], direct)
    summary = {
        "n_train": int(train_idx.size),
        "n_test": int(test_idx.size),
        "dim": emb.dim,
        "dim_full": full.dim,
        "rmse_full_sample": m_full["rmse"],
        "rmse_two_stage": m_two["rmse"],
        "mae_two_stage": m_two["mae"],
        "rmse_direct": m_direct["rmse"],
        "target_std": float(np.std(t[test_idx])),
    }
    table = pd.DataFrame(
        {
            "t": t[test_idx],
            "full_sample": full_sample[:, 0],
            "two_stage": result.predictions[:, 0],
            "direct": direct[:, 0],
        }
    )
    return ExperimentResult("dm-regression", summary, {"predictions": table})


EXPERIMENTS: Dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "sine-small-noise": _sine_experiment("sine-small-noise", 0.05),
    "sine-large-noise": _sine_experiment("sine-large-noise", 0.25),
    "noise-comparison": run_noise_comparison,
    "loocv-oracle": run_loocv_oracle,
    "residual-decay": run_residual_decay,
    "dm-cluster-agreement": run_dm_cluster_agreement,
    "dm-regression": run_dm_regression,
}


def run_experiment(name: str, cfg: ExperimentConfig) -> ExperimentResult:
    if name not in EXPERIMENTS:
        raise ValueError(f"Unknown experiment {name!r}; available: {', '.join(EXPERIMENTS)}")
    logger.info(f"Running experiment {name} (seed={cfg.seed})")
    result = EXPERIMENTS[name](cfg)
    logger.info(f"Experiment {name} summary: {result.summary}")
    return result


def summary_lines(result: ExperimentResult) -> list[str]:
    lines = [f"experiment: {result.name}"]
    for key, value in result.summary.items():
        if isinstance(value, float):
            value = f"{value:.10g}"
        lines.append(f"{key}: {value}")
    return lines
