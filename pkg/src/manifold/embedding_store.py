from __future__ import annotations

import logging
from dataclasses import asdict
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from src.manifold.diffusion import DiffusionEmbedding, DmConfig
from src.storage.container import read_container, write_container


logger = logging.getLogger(__name__)

EMBEDDING_KIND = "diffusion_embedding"


def save_embedding(emb: DiffusionEmbedding, path: str | Path) -> None:
    meta = {
        "n_points": emb.n_points,
        "n_features": int(emb.train_points.shape[1]),
        "dim": emb.dim,
        "sigma": emb.sigma,
        "config": asdict(emb.config),
    }
    write_container(
        path,
        EMBEDDING_KIND,
        meta,
        {
            "train_points": emb.train_points,
            "spectrum": emb.spectrum,
            "basis": emb.basis,
            "degrees": emb.degrees,
            "alpha_degrees": emb.alpha_degrees,
        },
    )
    logger.info(f"Saved embedding (N={emb.n_points}, d={emb.dim}) to {path}")


def load_embedding(path: str | Path) -> DiffusionEmbedding:
    meta, arrays = read_container(path, EMBEDDING_KIND)
    if arrays["basis"].shape != (meta["n_points"], meta["n_points"]):
        raise ValueError(f"{path}: eigenvector block does not match n_points={meta['n_points']}")
    return DiffusionEmbedding(
        spectrum=arrays["spectrum"],
        basis=arrays["basis"],
        dim=int(meta["dim"]),
        degrees=arrays["degrees"],
        alpha_degrees=arrays["alpha_degrees"],
        sigma=float(meta["sigma"]),
        config=DmConfig(**meta["config"]),
        train_points=arrays["train_points"],
    )


def coordinates_frame(coords: np.ndarray, extra: Mapping[str, Sequence] | None = None, start: int = 1) -> pd.DataFrame:
    """Coordinates as a table with columns psi_<start>..psi_<start+d-1>, plus optional extra columns."""
    c = np.asarray(coords, dtype=float)
    out = pd.DataFrame(c, columns=[f"psi_{k}" for k in range(start, start + c.shape[1])])
    for name, values in (extra or {}).items():
        out[name] = np.asarray(values)
    return out


def write_coordinates_csv(coords: np.ndarray, path: str | Path, extra: Mapping[str, Sequence] | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    coordinates_frame(coords, extra).to_csv(path, index=False)
    logger.info(f"Saved coordinates: {path}")
