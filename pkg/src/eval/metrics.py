from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from sklearn.metrics import mean_absolute_error, mean_squared_error


def _pair(y_true: np.ndarray, y_pred: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(y_true, dtype=float)
    p = np.asarray(y_pred, dtype=float)
    if t.ndim == 1:
        t = t.reshape(-1, 1)
    if p.ndim == 1:
        p = p.reshape(-1, 1)
    if t.shape != p.shape:
        raise ValueError(f"y_true {t.shape} and y_pred {p.shape} differ in shape")
    if t.size == 0:
        raise ValueError("Empty input")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(p))):
        raise ValueError("Non-finite values in y_true or y_pred")
    return t, p


def regression_metrics(y_true: np.ndarray, y_pred: np.ndarray) -> dict:
    """
    rmse, mae, mse, max_abs_error, bias (mean of y_pred - y_true) and n.
    Multi-output inputs are averaged uniformly over outputs, so mse matches the
    pyramid's training error (mean squared residual) output by output.
    """
    t, p = _pair(y_true, y_pred)
    mse = float(mean_squared_error(t, p))
    return {
        "rmse": float(np.sqrt(mse)),
        "mae": float(mean_absolute_error(t, p)),
        "mse": mse,
        "max_abs_error": float(np.max(np.abs(p - t))),
        "bias": float(np.mean(p - t)),
        "n": int(t.shape[0]),
    }


def metrics_frame(y_true: np.ndarray, y_pred: np.ndarray, names: Sequence[str] | None = None) -> pd.DataFrame:
    t, p = _pair(y_true, y_pred)
    names = list(names) if names else [f"y{m}" for m in range(t.shape[1])]
    rows = []
    for m, name in enumerate(names):
        rows.append({"target": name, **regression_metrics(t[:, m], p[:, m])})
    return pd.DataFrame(rows)


def curves_to_frame(curves: Mapping[str, Sequence[float]], sigmas: Sequence[float] | None = None) -> pd.DataFrame:
    """Tidy per-level table: level, optional sigma, one column per curve (NaN past a curve's end)."""
    n = max((len(v) for v in curves.values()), default=0)
    out = pd.DataFrame({"level": np.arange(n)})
    if sigmas is not None:
        s = np.full(n, np.nan)
        s[: min(n, len(sigmas))] = np.asarray(sigmas, dtype=float)[:n]
        out["sigma"] = s
    for name, values in curves.items():
        col = np.full(n, np.nan)
        v = np.asarray(values, dtype=float)
        col[: v.size] = v
        out[name] = col
    return out
