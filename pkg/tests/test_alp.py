import logging

import numpy as np
import pytest

from src.data.synthetic import SyntheticSpec, gen_composite_sine, odd_even_split
from src.kernels.operators import level_operator, pairwise_sq_dists
from src.pyramid.alp import (
    AlpParams,
    alp_predict,
    alp_staged_predict,
    alp_train,
    default_sigma0,
    influence_profile,
    iterate_levels,
)
from src.pyramid.loocv import exact_loocv_curve


def _sine(n=400, noise=0.05, seed=0):
    x, f = gen_composite_sine(SyntheticSpec(n_points=n, noise_amplitude=noise, seed=seed))
    return odd_even_split(x, f)


def test_constant_target_stops_at_first_level():
    x = np.linspace(0.0, 5.0, 50).reshape(-1, 1)
    f = np.full((50, 1), 3.5)
    model, report = alp_train(x, f)
    assert model.optimal_iter.tolist() == [0]
    assert report.stop_reason == "converged"
    pred = alp_predict(model, np.array([[0.3], [2.2], [4.9]]))
    assert np.allclose(pred, 3.5, atol=1e-12)


def test_residuals_start_at_target():
    (x, f), _ = _sine(200)
    model, _ = alp_train(x, f)
    assert np.array_equal(model.residuals[0], f)
    assert model.n_levels == int(model.optimal_iter.max()) + 1


def test_error_curve_minimum_is_chosen_level():
    (x, f), _ = _sine(400)
    model, report = alp_train(x, f)
    curve = report.error_curves[0]
    k = int(model.optimal_iter[0])
    assert k > 0
    assert k == int(np.argmin(curve))
    if report.stop_reason == "converged":
        assert curve[-1] >= curve[-2]
        steps = np.diff(curve[:-1])
        first_fall = int(np.flatnonzero(steps < 0)[0])
        assert np.all(steps[first_fall:] < 0)


def test_rise_before_first_fall_does_not_stop_training():
    (x, f), _ = _sine(200)
    model, report = alp_train(x, f)
    curve = report.error_curves[0]
    # the widest scales flatten the sine, so the first levels get worse
    assert curve[1] > curve[0]
    assert model.optimal_iter[0] >= 3
    assert curve[model.optimal_iter[0]] < curve[0]


def test_optimal_level_matches_exact_leave_one_out_argmin():
    x = np.linspace(0.0, 2.0 * np.pi, 100).reshape(-1, 1)
    params = AlpParams(mu=8.0, sigma0_factor=1.5, max_iter=4)
    sigma0 = default_sigma0(x, 1.5)
    matches = 0
    for seed in range(5):
        f = np.sin(x) + np.random.default_rng(seed).uniform(-1.0, 1.0, x.shape)
        model, _ = alp_train(x, f, params)
        loo = exact_loocv_curve(x, f, sigma0, mu=8.0, n_levels=4)
        matches += int(model.optimal_iter[0]) == int(np.argmin(loo[:, 0]))
    assert matches >= 4


def test_held_out_fit_ignores_own_target():
    x = np.linspace(0.0, 4.0, 30).reshape(-1, 1)
    f = np.cos(x)
    bumped = f.copy()
    bumped[12] += 5.0
    D2 = pairwise_sq_dists(x, x)
    base = list(iterate_levels(D2, f, 2.0, 2.0, "zero_diag_then_normalize", 2))
    moved = list(iterate_levels(D2, bumped, 2.0, 2.0, "zero_diag_then_normalize", 2))
    assert moved[0].fit[12, 0] == base[0].fit[12, 0]
    assert not np.array_equal(moved[0].fit, base[0].fit)
    # later levels see the bump through the residuals of the other points
    assert moved[1].fit[12, 0] != base[1].fit[12, 0]


def test_prediction_at_training_points_uses_full_operators():
    (x, f), _ = _sine(200)
    model, _ = alp_train(x, f)
    k = int(model.optimal_iter[0])
    D2 = pairwise_sq_dists(x, x)
    expected = sum(level_operator(D2, model.bandwidth(level), "full").apply(model.residuals[level]) for level in range(k + 1))
    assert np.allclose(alp_predict(model, x), expected, atol=1e-12)
    near = alp_predict(model, x[[10]] + 1e-9)
    assert np.allclose(near, expected[[10]], atol=1e-6)


def test_bandwidth_schedule_halves():
    (x, f), _ = _sine(200)
    model, report = alp_train(x, f, AlpParams(sigma0=8.0, mu=2.0))
    assert np.allclose(report.bandwidths, 8.0 / 2.0 ** np.arange(report.n_levels))
    assert model.bandwidth(3) == 1.0


def test_default_sigma0_is_twice_median_distance():
    x = np.array([[0.0], [1.0], [3.0]])
    assert default_sigma0(x) == 4.0
    with pytest.raises(ValueError):
        default_sigma0(np.zeros((4, 1)))


def test_multi_output_matches_single_outputs():
    (x, f), (xt, _) = _sine(300)
    g = np.cos(x)
    joint, _ = alp_train(x, np.hstack([f, g]))
    single_f, _ = alp_train(x, f)
    single_g, _ = alp_train(x, g)
    assert joint.optimal_iter.tolist() == [int(single_f.optimal_iter[0]), int(single_g.optimal_iter[0])]
    pred = alp_predict(joint, xt)
    assert np.allclose(pred[:, [0]], alp_predict(single_f, xt), atol=1e-12)
    assert np.allclose(pred[:, [1]], alp_predict(single_g, xt), atol=1e-12)


def test_constant_output_stops_while_other_continues():
    (x, f), _ = _sine(300)
    joint, report = alp_train(x, np.hstack([f, np.ones_like(f)]))
    assert joint.optimal_iter[1] == 0
    assert joint.optimal_iter[0] > 0
    assert len(report.error_curves[1]) == 1


def test_staged_predict_matches_predict_at_optimum():
    (x, f), (xt, _) = _sine(300)
    model, _ = alp_train(x, f)
    staged = alp_staged_predict(model, xt)
    k = int(model.optimal_iter[0])
    assert staged.shape == (model.n_levels, xt.shape[0], 1)
    assert np.allclose(staged[k], alp_predict(model, xt), atol=1e-12)


def test_influence_profile_rows_sum_to_one_and_narrow():
    (x, f), _ = _sine(300)
    model, _ = alp_train(x, f)
    prof = influence_profile(model, [5.0], n_levels=6)
    assert prof.shape == (6, model.n_points)
    assert np.allclose(prof.sum(axis=1), 1.0)
    nearest = int(np.argmin(np.abs(x[:, 0] - 5.0)))
    assert int(np.argmax(prof[-1])) == nearest
    assert prof[-1].max() > prof[0].max()


def test_test_dimension_mismatch():
    (x, f), _ = _sine(100)
    model, _ = alp_train(x, f)
    with pytest.raises(ValueError):
        alp_predict(model, np.zeros((3, 2)))


def test_training_input_validation():
    x = np.linspace(0, 1, 10).reshape(-1, 1)
    f = np.sin(x)
    with pytest.raises(ValueError):
        alp_train(x[:2], f[:2])
    with pytest.raises(ValueError):
        alp_train(x, f[:9])
    bad = f.copy()
    bad[3] = np.nan
    with pytest.raises(ValueError):
        alp_train(x, bad)
    with pytest.raises(ValueError):
        alp_train(x, f, AlpParams(sigma0=-1.0))
    with pytest.raises(ValueError):
        alp_train(x, f, AlpParams(mu=1.0))
    with pytest.raises(ValueError):
        alp_train(x, f, AlpParams(variant="nope"))


def test_total_underflow_at_initial_scale_asks_for_larger_sigma0():
    x = np.array([[0.0], [100.0], [200.0], [300.0]])
    f = np.array([[1.0], [2.0], [3.0], [4.0]])
    with pytest.raises(ValueError, match="larger sigma0"):
        alp_train(x, f, AlpParams(sigma0=0.01))


def test_model_arrays_are_read_only():
    (x, f), _ = _sine(100)
    model, _ = alp_train(x, f)
    with pytest.raises(ValueError):
        model.residuals[0, 0, 0] = 1.0


def test_standard_variant_keeps_diagonal_and_overfits():
    (x, f), _ = _sine(200)
    std, std_report = alp_train(x, f, AlpParams(variant="standard", max_iter=12))
    ada, ada_report = alp_train(x, f, AlpParams(max_iter=12))
    assert std.kernel_mode == "full"
    k = int(ada.optimal_iter[0])
    # the plain pyramid's training error is an underestimate of the held-out error
    assert std_report.error_curves[0][min(k, len(std_report.error_curves[0]) - 1)] <= ada_report.error_curves[0][k]


def test_report_frame_columns():
    (x, f), _ = _sine(200)
    _, report = alp_train(x, f, target_names=["f"])
    frame = report.to_frame(["f"])
    assert list(frame.columns) == ["level", "sigma", "err_f"]
    assert len(frame) == report.n_levels


def test_underflow_after_first_level_names_rows(caplog):
    x = np.array([[0.0], [1.0], [2.0], [50.0]])
    f = np.array([[0.0], [1.0], [2.0], [3.0]])
    # the cli logger setup stops propagation under "src", so listen on the module logger
    alp_logger = logging.getLogger("src.pyramid.alp")
    alp_logger.addHandler(caplog.handler)
    try:
        with caplog.at_level(logging.INFO, logger="src.pyramid.alp"):
            model, report = alp_train(x, f, AlpParams(sigma0=50.0, mu=40.0))
    finally:
        alp_logger.removeHandler(caplog.handler)
    assert report.stop_reason == "kernel_underflow"
    assert report.underflow
    assert report.n_levels == 1
    assert model.optimal_iter.tolist() == [0]
    assert any("in 1 of 4 rows [3]" in r.getMessage() for r in caplog.records)
