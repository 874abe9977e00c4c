from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd


logger = logging.getLogger(__name__)


def read_table(path: str | Path) -> pd.DataFrame:
    """Comma-separated, header row, '.' decimal, UTF-8."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"CSV not found: {path}")
    try:
        df = pd.read_csv(path, sep=",", decimal=".", encoding="utf-8")
    except pd.errors.ParserError as exc:
        msg = " ".join(str(exc).split())
        raise ValueError(f"{path}: malformed CSV ({msg})") from exc
    except pd.errors.EmptyDataError as exc:
        raise ValueError(f"{path}: empty CSV, a header row is required") from exc
    logger.debug(f"Loaded {path}: {len(df)} rows, columns={list(df.columns)}")
    return df


def numeric_block(df: pd.DataFrame, columns: Sequence[str], source: str = "<table>") -> np.ndarray:
    """
    Columns as a float matrix. The first non-numeric or missing cell is reported with
    its 1-based file line (the header is line 1).
    """
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise ValueError(f"{source}: missing columns {missing}; available: {list(df.columns)}")

    out = np.empty((len(df), len(columns)))
    for j, col in enumerate(columns):
        values = pd.to_numeric(df[col], errors="coerce")
        bad = values.isna() | ~np.isfinite(values.astype(float))
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise ValueError(f"{source}: line {row + 2}, column {col!r}: non-numeric value {df[col].iloc[row]!r}")
        out[:, j] = values.to_numpy(dtype=float)
    return out


def split_columns(df: pd.DataFrame, targets: Sequence[str], features: Sequence[str] | None = None) -> tuple[list[str], list[str]]:
    targets = list(targets)
    if features:
        feats = list(features)
    else:
        feats = [c for c in df.columns if c not in targets]
    if not feats:
        raise ValueError("No feature columns left after removing the targets")
    return feats, targets


def write_table(df: pd.DataFrame, path: str | Path) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        os.makedirs(path.parent, exist_ok=True)
    df.to_csv(path, index=False)
    logger.info(f"Saved CSV: {path}")
