from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from src.pyramid.alp import AlpModel
from src.storage.container import read_container, write_container


logger = logging.getLogger(__name__)

MODEL_KIND = "alp_model"


def _padded_curves(model: AlpModel) -> np.ndarray:
    length = max((len(c) for c in model.error_curves), default=0)
    out = np.full((length, model.n_outputs), np.nan)
    for j, curve in enumerate(model.error_curves):
        out[: len(curve), j] = curve
    return out


def save_model(model: AlpModel, path: str | Path) -> None:
    meta = {
        "n_points": model.n_points,
        "n_features": model.n_features,
        "n_outputs": model.n_outputs,
        "sigma0": model.sigma0,
        "mu": model.mu,
        "kernel_mode": model.kernel_mode,
        "variant": model.variant,
        "optimal_iter": [int(k) for k in model.optimal_iter],
        "curve_lengths": [len(c) for c in model.error_curves],
        "feature_names": list(model.feature_names),
        "target_names": list(model.target_names),
    }
    write_container(
        path,
        MODEL_KIND,
        meta,
        {
            "train_points": model.train_points,
            "residuals": model.residuals,
            "error_curves": _padded_curves(model),
        },
    )
    logger.info(f"Saved model ({model.n_points}x{model.n_features} -> {model.n_outputs}) to {path}")


def load_model(path: str | Path) -> AlpModel:
    meta, arrays = read_container(path, MODEL_KIND)

    points = arrays["train_points"]
    residuals = arrays["residuals"]
    expected = (meta["n_points"], meta["n_features"])
    if points.shape != expected or residuals.shape[1:] != (meta["n_points"], meta["n_outputs"]):
        raise ValueError(f"{path}: array shapes disagree with the header dimensions")

    curves = arrays["error_curves"]
    return AlpModel(
        train_points=points,
        sigma0=float(meta["sigma0"]),
        mu=float(meta["mu"]),
        residuals=residuals,
        error_curves=tuple(curves[:n, j] for j, n in enumerate(meta["curve_lengths"])),
        optimal_iter=np.asarray(meta["optimal_iter"], dtype=np.int64),
        kernel_mode=meta["kernel_mode"],
        variant=meta["variant"],
        feature_names=tuple(meta["feature_names"]),
        target_names=tuple(meta["target_names"]),
    )
