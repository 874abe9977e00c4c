from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.manifold.diffusion import DiffusionEmbedding
from src.pyramid.alp import AlpModel, AlpParams, TrainReport, alp_predict, alp_train


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TwoStageResult:
    predictions: np.ndarray
    test_coordinates: np.ndarray
    feature_model: AlpModel
    target_model: AlpModel


def coordinate_names(emb: DiffusionEmbedding, include_trivial: bool = False) -> list[str]:
    start = 0 if include_trivial else 1
    return [f"psi_{k}" for k in range(start, emb.dim + 1)]


def train_extension(
    emb: DiffusionEmbedding,
    params: AlpParams = AlpParams(),
    include_trivial: bool = False,
) -> tuple[AlpModel, TrainReport]:
    """One multi-output pyramid over the retained eigenvectors, each with its own stopping level."""
    start = 0 if include_trivial else 1
    targets = emb.basis[:, start : emb.dim + 1]
    names = coordinate_names(emb, include_trivial)
    feature_names = [f"x{j}" for j in range(emb.train_points.shape[1])]
    model, report = alp_train(emb.train_points, targets, params, feature_names=feature_names, target_names=names)
    logger.info(f"Extension stopping levels: {dict(zip(names, model.optimal_iter.tolist()))}")
    return model, report


def scale_extension(emb: DiffusionEmbedding, eigvecs: np.ndarray, include_trivial: bool = False) -> np.ndarray:
    start = 0 if include_trivial else 1
    lam = emb.spectrum[start : emb.dim + 1] ** emb.config.t
    return eigvecs * lam


def dm_extend(
    emb: DiffusionEmbedding,
    X_test: np.ndarray,
    params: AlpParams = AlpParams(),
    include_trivial: bool = False,
) -> np.ndarray:
    """
    Out-of-sample diffusion coordinates: the eigenvectors are treated as functions on
    the training points, extended with the pyramid and scaled by lambda_k^t.
    """
    model, _ = train_extension(emb, params, include_trivial)
    return scale_extension(emb, alp_predict(model, X_test), include_trivial)


def two_stage_regression(
    emb: DiffusionEmbedding,
    y_train: np.ndarray,
    X_test: np.ndarray,
    feature_params: AlpParams = AlpParams(),
    target_params: AlpParams = AlpParams(),
) -> TwoStageResult:
    """
    Predict a target for new points through the embedding: a first pyramid extends the
    diffusion coordinates to X_test, a second maps diffusion coordinates to the target.
    """
    y = np.asarray(y_train, dtype=float)
    if y.shape[0] != emb.n_points:
        raise ValueError(f"y_train has {y.shape[0]} rows, embedding has {emb.n_points} points")

    feature_model, _ = train_extension(emb, feature_params)
    test_coords = scale_extension(emb, alp_predict(feature_model, X_test))

    coord_names = coordinate_names(emb)
    target_model, _ = alp_train(emb.coordinates, y, target_params, feature_names=coord_names, target_names=["y"])
    predictions = alp_predict(target_model, test_coords)
    return TwoStageResult(
        predictions=predictions,
        test_coordinates=test_coords,
        feature_model=feature_model,
        target_model=target_model,
    )
