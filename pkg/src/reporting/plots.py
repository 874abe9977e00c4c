from __future__ import annotations

from pathlib import Path
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def _save(fig_path: Path) -> Path:
    fig_path.parent.mkdir(parents=True, exist_ok=True)
    plt.tight_layout()
    plt.savefig(fig_path, dpi=150)
    plt.close()
    return fig_path


def plot_error_curves(table: pd.DataFrame, out: Path, title: str = "Error per level") -> Path:
    """Every column except level/sigma/instance is drawn against the level, on a log scale."""
    plt.figure()
    curves = [c for c in table.columns if c not in ("level", "sigma", "instance")]
    for c in curves:
        plt.semilogy(table["level"], table[c], marker="o", label=c)
    plt.title(title)
    plt.xlabel("Level")
    plt.ylabel("Mean squared error")
    plt.legend()
    return _save(out)


def plot_predictions(table: pd.DataFrame, out: Path, title: str = "Predictions on the test half") -> Path:
    plt.figure(figsize=(10, 4))
    plt.plot(table["x"], table["f"], ".", ms=2, alpha=0.4, label="target")
    if "f_clean" in table.columns:
        plt.plot(table["x"], table["f_clean"], lw=1, label="noise-free")
    plt.plot(table["x"], table["prediction"], lw=1, label="prediction")
    plt.title(title)
    plt.xlabel("x")
    plt.legend()
    return _save(out)


def plot_embedding(table: pd.DataFrame, out: Path, color: str = "t", title: str = "Diffusion coordinates") -> Path:
    plt.figure()
    plt.scatter(table["psi_1"], table["psi_2"] if "psi_2" in table.columns else table["psi_1"] * 0.0,
                c=table[color] if color in table.columns else None, s=8)
    if color in table.columns:
        plt.colorbar(label=color)
    plt.title(title)
    plt.xlabel("psi_1")
    plt.ylabel("psi_2")
    return _save(out)


def plot_oracle_instance(curves: pd.DataFrame, out: Path, instance: int = 0) -> Path:
    sub = curves[curves["instance"] == instance].drop(columns=["instance"])
    return plot_error_curves(sub, out, title=f"Training, auto-adaptive and leave-one-out error (instance {instance})")


def render_experiment_figures(exp_root: Path, fig_dir: Path) -> Dict[str, List[Path]]:
    """Figures for every experiment output directory found under exp_root."""
    made: Dict[str, List[Path]] = {}

    def add(name: str, path: Path) -> None:
        made.setdefault(name, []).append(path)

    for name in ("sine-small-noise", "sine-large-noise"):
        d = exp_root / name
        if (d / "error_curve.csv").exists():
            add(name, plot_error_curves(pd.read_csv(d / "error_curve.csv"), fig_dir / f"{name}_error_curve.png"))
        if (d / "predictions.csv").exists():
            add(name, plot_predictions(pd.read_csv(d / "predictions.csv"), fig_dir / f"{name}_predictions.png"))

    d = exp_root / "loocv-oracle"
    if (d / "curves.csv").exists():
        add("loocv-oracle", plot_oracle_instance(pd.read_csv(d / "curves.csv"), fig_dir / "loocv-oracle_curves.png"))

    d = exp_root / "residual-decay"
    if (d / "error_curve.csv").exists():
        add("residual-decay", plot_error_curves(pd.read_csv(d / "error_curve.csv"), fig_dir / "residual-decay.png"))

    d = exp_root / "dm-cluster-agreement"
    if (d / "coordinates.csv").exists():
        coords = pd.read_csv(d / "coordinates.csv")
        add("dm-cluster-agreement", plot_embedding(coords, fig_dir / "dm_extended_by_t.png", color="t"))
        add("dm-cluster-agreement", plot_embedding(coords, fig_dir / "dm_extended_clusters.png", color="label_extended",
                                                   title="Extended coordinates, K-means clusters"))
    return made
