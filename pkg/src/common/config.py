from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from src.manifold.diffusion import DmConfig, check_config
from src.pyramid.alp import AlpParams, check_params


DEFAULT_CONFIG_PATH = "config/base.yaml"


@dataclass(frozen=True)
class EvalConfig:
    n_clusters: int = 3
    kmeans_max_iter: int = 300
    kmeans_n_init: int = 10


@dataclass(frozen=True)
class ExperimentConfig:
    alp: AlpParams = AlpParams()
    dm: DmConfig = DmConfig()
    eval: EvalConfig = EvalConfig()
    seed: int = 0
    output_dir: str = "outputs"
    experiments: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)

    def experiment_options(self, name: str) -> dict[str, Any]:
        return dict(self.experiments.get(name) or {})


def load_yaml(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        raw = yaml.safe_load(f)
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: top level must be a mapping, got {type(raw).__name__}")
    return raw


def _section(cls, raw: Mapping[str, Any] | None, section: str):
    raw = dict(raw or {})
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - names)
    if unknown:
        raise ValueError(f"Unknown key(s) {unknown} in config section '{section}'; allowed: {sorted(names)}")
    return cls(**raw)


def _override(obj, values: Mapping[str, Any]):
    given = {k: v for k, v in values.items() if v is not None}
    return replace(obj, **given) if given else obj


def build_config(raw: Mapping[str, Any] | None = None, overrides: Mapping[str, Mapping[str, Any]] | None = None) -> ExperimentConfig:
    """
    Dataclass defaults, then YAML values, then CLI overrides (None means "not given").
    Every numeric parameter is validated here, before any computation runs.
    """
    raw = dict(raw or {})
    overrides = overrides or {}
    known = {"alp", "dm", "eval", "seed", "paths", "qa", "experiments"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValueError(f"Unknown config section(s) {unknown}; allowed: {sorted(known)}")

    alp = _override(_section(AlpParams, raw.get("alp"), "alp"), overrides.get("alp", {}))
    dm = _override(_section(DmConfig, raw.get("dm"), "dm"), overrides.get("dm", {}))
    ev = _override(_section(EvalConfig, raw.get("eval"), "eval"), overrides.get("eval", {}))

    top = overrides.get("top", {})
    seed = top.get("seed") if top.get("seed") is not None else raw.get("seed", 0)
    paths = dict(raw.get("paths") or {})
    output_dir = top.get("output_dir") or paths.get("output_dir", "outputs")

    check_params(alp)
    check_config(dm)
    if ev.n_clusters < 1 or ev.kmeans_max_iter < 1 or ev.kmeans_n_init < 1:
        raise ValueError(f"eval settings must be >= 1, got {ev}")
    if int(seed) != seed or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed}")

    experiments = raw.get("experiments") or {}
    if not isinstance(experiments, dict):
        raise ValueError("config section 'experiments' must be a mapping")

    return ExperimentConfig(alp=alp, dm=dm, eval=ev, seed=int(seed), output_dir=str(output_dir), experiments=experiments)


def load_config(path: str | Path | None = None, overrides: Mapping[str, Mapping[str, Any]] | None = None) -> ExperimentConfig:
    """Read the YAML config if present; the default path may be absent (defaults apply)."""
    if path is None:
        raw = load_yaml(DEFAULT_CONFIG_PATH) if Path(DEFAULT_CONFIG_PATH).exists() else {}
    else:
        raw = load_yaml(path)
    return build_config(raw, overrides)
