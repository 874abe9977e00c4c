from __future__ import annotations

import argparse
import os
import sys

import yaml

sys.path.append(os.path.abspath("."))

from src.common.logging import setup_logger
from src.data.csv_io import read_table, write_table
from src.data.quality import QAConfig, run_qa, summary_to_df


def main() -> None:
    logger = setup_logger("run_qa")

    parser = argparse.ArgumentParser(description="Sanity checks on a sample CSV before fitting")
    parser.add_argument("csv")
    parser.add_argument("--columns", nargs="*", default=None, help="feature columns (default: all)")
    args = parser.parse_args()

    with open("config/base.yaml", "r") as f:
        cfg = yaml.safe_load(f)

    df = read_table(args.csv)
    logger.info(f"Loaded: {len(df)} rows")

    qa_cfg = QAConfig(
        outlier_sigma=float(cfg["qa"]["outlier_sigma"]),
        min_rows=int(cfg["qa"]["min_rows"]),
    )
    columns = args.columns or list(df.columns)
    df2, summary = run_qa(df, columns, qa_cfg)

    processed_dir = cfg["paths"]["processed_dir"]
    stem = os.path.splitext(os.path.basename(args.csv))[0]
    write_table(df2, f"{processed_dir}/{stem}_qa_flags.csv")
    write_table(summary_to_df(summary), f"{processed_dir}/{stem}_qa_summary.csv")

    logger.info(f"QA summary: {summary}")


if __name__ == "__main__":
    main()
