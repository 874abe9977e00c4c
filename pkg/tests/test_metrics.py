import numpy as np
import pytest

from src.eval.metrics import curves_to_frame, metrics_frame, regression_metrics


def test_perfect_prediction():
    y = np.linspace(-1, 1, 20)
    m = regression_metrics(y, y)
    assert m["rmse"] == 0.0 and m["mae"] == 0.0 and m["n"] == 20


def test_constant_offset():
    y = np.random.default_rng(0).normal(size=50)
    m = regression_metrics(y, y + 0.3)
    assert np.isclose(m["rmse"], 0.3)
    assert np.isclose(m["mae"], 0.3)
    assert np.isclose(m["bias"], 0.3)
    assert np.isclose(m["rmse"] ** 2, m["mse"])


def test_uniform_noise_rms():
    delta = 0.05
    eps = np.random.default_rng(0).uniform(-delta, delta, size=200_000)
    m = regression_metrics(np.zeros_like(eps), eps)
    assert np.isclose(m["rmse"], delta / np.sqrt(3), rtol=0.05)


def test_multi_output_mse_is_mean_over_outputs():
    t = np.zeros((10, 2))
    p = np.column_stack([np.full(10, 1.0), np.full(10, 3.0)])
    assert np.isclose(regression_metrics(t, p)["mse"], 5.0)
    frame = metrics_frame(t, p, ["a", "b"])
    assert frame["mse"].tolist() == [1.0, 9.0]


def test_errors():
    with pytest.raises(ValueError):
        regression_metrics([], [])
    with pytest.raises(ValueError):
        regression_metrics([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        regression_metrics([1.0, np.nan], [1.0, 2.0])


def test_curves_frame_pads():
    frame = curves_to_frame({"a": [3.0, 2.0, 1.0], "b": [5.0]}, sigmas=[4.0, 2.0, 1.0])
    assert list(frame.columns) == ["level", "sigma", "a", "b"]
    assert frame["level"].tolist() == [0, 1, 2]
    assert np.isnan(frame["b"].iloc[2])
