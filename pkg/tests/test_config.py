import pytest

from src.common.config import build_config, load_config, load_yaml
from src.common.logging import parse_level, setup_logger


def test_defaults_without_yaml():
    cfg = build_config({})
    assert cfg.alp.mu == 2.0
    assert cfg.alp.sigma0 is None
    assert cfg.dm.alpha == 1.0 and cfg.dm.t == 1 and cfg.dm.delta == 0.1
    assert cfg.eval.n_clusters == 3
    assert cfg.seed == 0


def test_yaml_then_overrides():
    raw = {"alp": {"mu": 3.0, "max_iter": 20}, "seed": 4, "paths": {"output_dir": "x"}}
    cfg = build_config(raw, {"alp": {"mu": None, "max_iter": 5}, "top": {"seed": 9, "output_dir": None}})
    assert cfg.alp.mu == 3.0
    assert cfg.alp.max_iter == 5
    assert cfg.seed == 9
    assert cfg.output_dir == "x"


def test_invalid_values_rejected_before_running():
    with pytest.raises(ValueError):
        build_config({"alp": {"mu": 0.5}})
    with pytest.raises(ValueError):
        build_config({"dm": {"alpha": 2.0}})
    with pytest.raises(ValueError, match="Unknown key"):
        build_config({"alp": {"bandwidth": 1.0}})
    with pytest.raises(ValueError, match="Unknown config section"):
        build_config({"broker": {}})


def test_repository_config_loads():
    cfg = load_config("config/base.yaml")
    assert cfg.experiment_options("loocv-oracle")["n_points"] == 100
    assert cfg.alp.kernel_mode == "zero_diag_then_normalize"


def test_missing_config(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_yaml(tmp_path / "none.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("- 1\n- 2\n")
    with pytest.raises(ValueError):
        load_yaml(bad)


def test_logger_setup(tmp_path):
    logfile = tmp_path / "run.log"
    logger = setup_logger("src", parse_level("debug"), str(logfile))
    logger.getChild("pyramid").debug("hello")
    for h in logger.handlers:
        h.flush()
    assert "| DEBUG | src.pyramid | hello" in logfile.read_text()
    with pytest.raises(ValueError):
        parse_level("loud")
