from __future__ import annotations

import subprocess
import sys
from pathlib import Path


ROOT = Path(__file__).resolve().parents[1]

EXPERIMENTS = [
    "sine-small-noise",
    "sine-large-noise",
    "noise-comparison",
    "loocv-oracle",
    "residual-decay",
    "dm-cluster-agreement",
    "dm-regression",
]


def _run(cmd: list[str]) -> None:
    print(f"\n=== RUN: {' '.join(cmd)} ===")
    p = subprocess.run(cmd, cwd=str(ROOT))
    if p.returncode != 0:
        raise SystemExit(p.returncode)


def main() -> None:
    # 1) Experiments (outputs under paths.output_dir)
    for name in EXPERIMENTS:
        _run([sys.executable, "scripts/alp.py", "experiment", name])

    # 2) Figures
    _run([sys.executable, "scripts/make_report_plots.py"])

    print("\nPipeline completed successfully.")


if __name__ == "__main__":
    main()
