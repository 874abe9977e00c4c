from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
import yaml

from src.common.config import ExperimentConfig, load_config
from src.common.logging import parse_level, setup_logger
from src.data.csv_io import numeric_block, read_table, split_columns, write_table
from src.data.quality import standardize
from src.data.synthetic import (
    SyntheticSpec,
    gen_composite_sine,
    gen_swiss_roll,
    odd_even_indices,
    random_split,
)
from src.eval.clustering import cluster_agreement, kmeans
from src.eval.metrics import curves_to_frame
from src.experiments.runs import EXPERIMENTS, run_experiment, summary_lines
from src.manifold.diffusion import dm_fit
from src.manifold.embedding_store import coordinates_frame, save_embedding
from src.manifold.extension import dm_extend
from src.pyramid.alp import alp_predict, alp_train, default_sigma0
from src.pyramid.loocv import exact_loocv_curve, lp_train_error_curve
from src.pyramid.model_store import load_model, save_model


logger = logging.getLogger("src.cli")


def _names(values: Sequence[str] | None) -> list[str]:
    """Accept repeated flags and comma-separated lists alike."""
    out: list[str] = []
    for v in values or []:
        out.extend(p.strip() for p in v.split(",") if p.strip())
    return out


def _overrides(args: argparse.Namespace) -> dict:
    def pick(*names: str) -> dict:
        return {n: getattr(args, n, None) for n in names}

    return {
        "alp": pick("sigma0", "mu", "max_iter", "kernel_mode", "variant"),
        "dm": {**pick("alpha", "t", "delta", "sigma_percentile"), "sigma": getattr(args, "dm_sigma", None)},
        "eval": {"n_clusters": getattr(args, "k", None), **pick("kmeans_max_iter", "kmeans_n_init")},
        "top": pick("seed", "output_dir"),
    }


def _config(args: argparse.Namespace) -> ExperimentConfig:
    return load_config(args.config, _overrides(args))


def _load_xy(path: str, targets: Sequence[str], features: Sequence[str] | None):
    df = read_table(path)
    feats, targs = split_columns(df, targets, features)
    return df, feats, targs, numeric_block(df, feats, path), numeric_block(df, targs, path)


def _load_x(path: str, features: Sequence[str] | None, exclude: Sequence[str] = ()):
    df = read_table(path)
    feats = list(features) if features else [c for c in df.columns if c not in set(exclude)]
    if not feats:
        raise ValueError(f"{path}: no feature columns selected")
    return df, feats, numeric_block(df, feats, path)


# ---------- subcommands ----------

def cmd_synth(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if args.kind == "sine":
        x, f = gen_composite_sine(SyntheticSpec(n_points=args.n, noise_amplitude=args.noise, seed=cfg.seed))
        df = pd.DataFrame({"x": x[:, 0], "f": f[:, 0]})
    else:
        X, t = gen_swiss_roll(args.n, args.noise, cfg.seed)
        df = pd.DataFrame({"x1": X[:, 0], "x2": X[:, 1], "x3": X[:, 2], "t": t})

    write_table(df, args.out)
    if args.split != "none":
        if not (args.train_out and args.test_out):
            raise ValueError("--split needs both --train-out and --test-out")
        if args.split == "odd-even":
            tr, te = odd_even_indices(len(df))
        else:
            tr, te = random_split(len(df), args.train_fraction, cfg.seed)
        write_table(df.iloc[tr], args.train_out)
        write_table(df.iloc[te], args.test_out)
    print(f"wrote {len(df)} rows to {args.out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _config(args)
    _, feats, targs, X, F = _load_xy(args.data, _names(args.target), _names(args.features))
    model, report = alp_train(X, F, cfg.alp, feature_names=feats, target_names=targs)
    save_model(model, args.model)

    table = report.to_frame(targs)
    print(f"variant: {model.variant}  kernel_mode: {model.kernel_mode}  sigma0: {model.sigma0:.10g}  mu: {model.mu:g}")
    print(f"stop_reason: {report.stop_reason}")
    print(table.to_string(index=False, float_format=lambda v: f"{v:.6e}"))
    for name, k in zip(targs, model.optimal_iter):
        print(f"optimal_iter[{name}]: {int(k)}  sigma: {model.bandwidth(int(k)):.6g}")
    if args.report:
        write_table(table, args.report)
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    df = read_table(args.data)
    feats = list(model.feature_names) or [c for c in df.columns][: model.n_features]
    X = numeric_block(df, feats, args.data)
    pred = alp_predict(model, X)

    out = df.copy()
    names = list(model.target_names) or [f"y{m}" for m in range(model.n_outputs)]
    for m, name in enumerate(names):
        out[f"pred_{name}"] = pred[:, m]
    write_table(out, args.out)
    print(f"wrote {len(out)} predictions to {args.out}")
    return 0


def cmd_loocv_oracle(args: argparse.Namespace) -> int:
    cfg = _config(args)
    _, _, targs, X, F = _load_xy(args.data, _names(args.target), _names(args.features))
    sigma0 = cfg.alp.sigma0 if cfg.alp.sigma0 is not None else default_sigma0(X, cfg.alp.sigma0_factor)

    loo = exact_loocv_curve(X, F, sigma0, cfg.alp.mu, args.levels)
    alp = lp_train_error_curve(X, F, sigma0, cfg.alp.mu, args.levels, variant="auto_adaptive", kernel_mode=cfg.alp.kernel_mode)
    curves = {}
    for m, name in enumerate(targs):
        curves[f"alp_{name}"] = alp[:, m]
        curves[f"loocv_{name}"] = loo[:, m]
    table = curves_to_frame(curves, sigmas=[sigma0 / cfg.alp.mu ** l for l in range(args.levels)])

    print(table.to_string(index=False, float_format=lambda v: f"{v:.6e}"))
    for m, name in enumerate(targs):
        k_alp, k_loo = int(np.argmin(alp[:, m])), int(np.argmin(loo[:, m]))
        print(f"argmin[{name}]: alp={k_alp} loocv={k_loo} match={k_alp == k_loo}")
    if args.out:
        write_table(table, args.out)
    return 0


def _print_spectrum(emb) -> None:
    lam = " ".join(f"{v:.8f}" for v in emb.eigenvalues)
    print(f"sigma: {emb.sigma:.10g}")
    print(f"retained_dimension: {emb.dim}")
    print(f"eigenvalues: {lam}")


def cmd_dm(args: argparse.Namespace) -> int:
    cfg = _config(args)
    keep = _names(args.keep)
    df, _, X = _load_x(args.data, _names(args.features), exclude=keep)
    if args.standardize:
        X, _, _ = standardize(X)
    emb = dm_fit(X, cfg.dm)
    _print_spectrum(emb)

    coords = coordinates_frame(emb.coordinates, extra={c: df[c].to_numpy() for c in keep})
    write_table(coords, args.out)
    if args.embedding:
        save_embedding(emb, args.embedding)
    return 0


def cmd_dm_extend(args: argparse.Namespace) -> int:
    cfg = _config(args)
    keep = _names(args.keep)
    feats = _names(args.features)
    _, feats, X_train = _load_x(args.train, feats, exclude=keep)
    test_df, _, X_test = _load_x(args.test, feats)
    if args.standardize:
        X_train, X_test, _ = standardize(X_train, X_test)

    emb = dm_fit(X_train, cfg.dm)
    _print_spectrum(emb)
    coords = dm_extend(emb, X_test, cfg.alp)
    extra = {c: test_df[c].to_numpy() for c in keep if c in test_df.columns}
    write_table(coordinates_frame(coords, extra=extra), args.out)
    return 0


def cmd_kmeans(args: argparse.Namespace) -> int:
    cfg = _config(args)
    ref_col = args.reference
    df, _, X = _load_x(args.data, _names(args.columns), exclude=[ref_col] if ref_col else [])
    K = cfg.eval.n_clusters
    res = kmeans(X, K, seed=cfg.seed, max_iter=cfg.eval.kmeans_max_iter, n_init=cfg.eval.kmeans_n_init)
    print(f"inertia: {res.inertia:.10g}  iterations: {res.n_iter}  converged: {res.converged}")
    print(f"cluster_sizes: {res.sizes.tolist()}")

    out = df.copy()
    out["cluster"] = res.labels
    if ref_col:
        ref = numeric_block(df, [ref_col], args.data)[:, 0].astype(int)
        cm = cluster_agreement(ref, res.labels, K)
        print(cm.to_frame().to_string())
        print(f"accuracy: {cm.accuracy:.5f}")
        out["cluster"] = cm.relabel(res.labels)
    write_table(out, args.out)
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if args.name not in EXPERIMENTS:
        raise ValueError(f"Unknown experiment {args.name!r}; available: {', '.join(EXPERIMENTS)}")
    if args.standardize:
        opts = {**cfg.experiment_options(args.name), "standardize": True}
        cfg = replace(cfg, experiments={**cfg.experiments, args.name: opts})
    result = run_experiment(args.name, cfg)

    out_dir = Path(cfg.output_dir) / result.name
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = summary_lines(result)
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    with open(out_dir / "summary.yaml", "w", encoding="utf-8") as f:
        yaml.safe_dump(_plain(result.summary), f, sort_keys=False)
    for name, table in result.tables.items():
        write_table(table, out_dir / f"{name}.csv")

    print("\n".join(lines))
    return 0


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


# ---------- parser ----------

def _add_alp_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pyramid")
    g.add_argument("--sigma0", type=float, default=None, help="initial bandwidth (default: 2 x median pairwise distance)")
    g.add_argument("--mu", type=float, default=None, help="bandwidth divisor per level")
    g.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    g.add_argument("--kernel-mode", dest="kernel_mode", default=None,
                   choices=["full", "zero_diag_then_normalize", "normalize_then_zero_diag"])
    g.add_argument("--variant", default=None, choices=["standard", "auto_adaptive"])


def _add_dm_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("diffusion maps")
    g.add_argument("--dm-sigma", dest="dm_sigma", type=float, default=None, help="kernel width (default: percentile rule)")
    g.add_argument("--sigma-percentile", dest="sigma_percentile", type=float, default=None)
    g.add_argument("--alpha", type=float, default=None)
    g.add_argument("--t", type=int, default=None)
    g.add_argument("--delta", type=float, default=None)
    g.add_argument("--standardize", action="store_true", help="z-score the features with training statistics first")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alp", description="Auto-adaptive Laplacian pyramids and diffusion maps")
    parser.add_argument("--config", default=None, help="YAML config (default: config/base.yaml if present)")
    parser.add_argument("--log-level", dest="log_level", default="INFO")
    parser.add_argument("--log-file", dest="log_file", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic sample as CSV")
    p.add_argument("kind", choices=["sine", "swiss-roll"])
    p.add_argument("--n", type=int, default=4000)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--split", choices=["none", "odd-even", "random"], default="none")
    p.add_argument("--train-fraction", dest="train_fraction", type=float, default=0.7)
    p.add_argument("--train-out", dest="train_out", default=None)
    p.add_argument("--test-out", dest="test_out", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="fit a pyramid and save the model")
    p.add_argument("--data", required=True)
    p.add_argument("--target", action="append", required=True)
    p.add_argument("--features", action="append", default=None)
    p.add_argument("--model", required=True)
    p.add_argument("--report", default=None, help="optional CSV of the error curve")
    _add_alp_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="evaluate a saved model on new points")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("loocv-oracle", help="exact leave-one-out curve next to the auto-adaptive curve")
    p.add_argument("--data", required=True)
    p.add_argument("--target", action="append", required=True)
    p.add_argument("--features", action="append", default=None)
    p.add_argument("--levels", type=int, default=10)
    p.add_argument("--out", default=None)
    _add_alp_flags(p)
    p.set_defaults(func=cmd_loocv_oracle)

    p = sub.add_parser("dm", help="diffusion maps embedding of a CSV sample")
    p.add_argument("--data", required=True)
    p.add_argument("--features", action="append", default=None)
    p.add_argument("--keep", action="append", default=None, help="non-feature columns copied to the output")
    p.add_argument("--out", required=True)
    p.add_argument("--embedding", default=None, help="optional binary embedding file")
    _add_dm_flags(p)
    p.set_defaults(func=cmd_dm)

    p = sub.add_parser("dm-extend", help="embed a train CSV and extend the coordinates to a test CSV")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--features", action="append", default=None)
    p.add_argument("--keep", action="append", default=None)
    p.add_argument("--out", required=True)
    _add_dm_flags(p)
    _add_alp_flags(p)
    p.set_defaults(func=cmd_dm_extend)

    p = sub.add_parser("kmeans", help="K-means on CSV columns, optionally scored against a label column")
    p.add_argument("--data", required=True)
    p.add_argument("--columns", action="append", default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-iter", dest="kmeans_max_iter", type=int, default=None)
    p.add_argument("--n-init", dest="kmeans_n_init", type=int, default=None)
    p.add_argument("--reference", default=None, help="column with reference labels in [0, K)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_kmeans)

    p = sub.add_parser("experiment", help=f"run a named experiment: {', '.join(EXPERIMENTS)}")
    p.add_argument("name")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output-dir", dest="output_dir", default=None)
    _add_alp_flags(p)
    _add_dm_flags(p)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        setup_logger("src", parse_level(args.log_level), args.log_file)
        return int(args.func(args))
    except Exception as exc:
        logger.debug("Command failed", exc_info=True)
        message = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
