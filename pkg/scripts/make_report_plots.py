#!/usr/bin/env python3
from __future__ import annotations

import os
import sys
from pathlib import Path

import yaml

sys.path.append(os.path.abspath("."))

from src.reporting.plots import render_experiment_figures


FIG_DIR = Path("reports/figures")


def main() -> None:
    with open("config/base.yaml", "r") as f:
        cfg = yaml.safe_load(f)

    exp_root = Path(cfg["paths"]["output_dir"])
    if not exp_root.exists():
        raise SystemExit(f"No experiment outputs under {exp_root}. Run scripts/run_pipeline.py first.")

    made = render_experiment_figures(exp_root, FIG_DIR)
    if not made:
        raise SystemExit("No experiment CSVs found. Nothing to plot.")

    print("Saved figures to:", FIG_DIR.resolve())
    for name, paths in made.items():
        for fp in paths:
            print(f" - [{name}] {fp}")


if __name__ == "__main__":
    main()
