from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.preprocessing import StandardScaler


@dataclass(frozen=True)
class QAConfig:
    outlier_sigma: float = 10.0    # flag if |z| > this, per column
    min_rows: int = 3


def run_qa(df: pd.DataFrame, columns: Sequence[str], cfg: QAConfig = QAConfig()) -> Tuple[pd.DataFrame, Dict[str, object]]:
    """
    Sample-table checks before fitting: duplicate feature rows, constant columns,
    per-column z-score outliers. Returns the table with flag columns and a summary.
    """
    df = df.copy()
    cols = list(columns)
    block = df[cols].apply(pd.to_numeric, errors="coerce").astype(float)

    non_finite = int((~np.isfinite(block.to_numpy())).any(axis=1).sum())
    duplicates = int(block.duplicated().sum())

    sd = block.std(ddof=0)
    constant = [c for c in cols if not sd[c] > 0]

    z = (block - block.mean()) / sd.replace(0.0, np.nan)
    df["flag_outlier"] = (z.abs() > cfg.outlier_sigma).any(axis=1)
    df["flag_duplicate"] = block.duplicated(keep="first")

    summary: Dict[str, object] = {
        "rows": int(len(df)),
        "columns": len(cols),
        "enough_rows": bool(len(df) >= cfg.min_rows),
        "non_finite_rows": non_finite,
        "duplicate_rows": duplicates,
        "constant_columns": ",".join(constant),
        "outlier_rows": int(df["flag_outlier"].sum()),
        "min_spread": float(sd.min()) if len(cols) else float("nan"),
        "max_spread": float(sd.max()) if len(cols) else float("nan"),
    }
    return df, summary


def summary_to_df(summary: Dict[str, object]) -> pd.DataFrame:
    return pd.DataFrame([summary])


def standardize(train: np.ndarray, test: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray | None, StandardScaler]:
    """Zero mean, unit variance per column, fitted on the training block only."""
    scaler = StandardScaler().fit(np.asarray(train, dtype=float))
    train_z = scaler.transform(np.asarray(train, dtype=float))
    test_z = scaler.transform(np.asarray(test, dtype=float)) if test is not None else None
    return train_z, test_z, scaler
