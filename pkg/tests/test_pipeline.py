"""End-to-end estimation and forecasting behaviour."""

import json

import numpy as np
import pytest

from fnets.panel import RunConfig
from fnets.pipeline import (
    cv_train_ratio,
    feasible_orders,
    fnets_estimate,
    fnets_forecast,
    innovation_cv_pairs,
)
from fnets.simulation import DgpSpec, demeaned_panel, simulate_panel


def noise_panel(seed, p, n):
    rng = np.random.default_rng(seed)
    return demeaned_panel(rng.standard_normal((p, n)))


def quick_config(**kw):
    base = dict(q=0, d=1, lam=0.3, eta=0.1)
    base.update(kw)
    return RunConfig(**base)


def test_q_zero_skips_the_adjustment():
    panel = noise_panel(0, 4, 60)
    fit = fnets_estimate(panel, quick_config())
    np.testing.assert_array_equal(fit.acv_xi.gammas, fit.acv_x.gammas)
    np.testing.assert_array_equal(fit.acv_chi.gammas, 0.0)
    assert fit.factors.q == 0
    assert fit.factors.r == 0


def test_estimate_is_deterministic():
    panel = noise_panel(1, 4, 80)
    config = RunConfig(q=0)
    a = fnets_estimate(panel, config)
    b = fnets_estimate(panel, config)
    np.testing.assert_array_equal(a.var.beta, b.var.beta)
    np.testing.assert_array_equal(a.precision.delta_hat, b.precision.delta_hat)
    np.testing.assert_array_equal(a.longrun.omega_hat, b.longrun.omega_hat)
    np.testing.assert_array_equal(
        a.networks.granger.weights, b.networks.granger.weights
    )
    assert a.manifest() == b.manifest()


def test_estimate_leaves_inputs_untouched():
    panel = noise_panel(2, 3, 60)
    before = panel.values.copy()
    config = quick_config()
    fnets_estimate(panel, config)
    np.testing.assert_array_equal(panel.values, before)
    assert config.lam == 0.3 and config.d == 1


def test_resolved_config_is_complete_and_serializable():
    panel = noise_panel(3, 4, 80)
    fit = fnets_estimate(panel, RunConfig(q=0))
    cfg = fit.config
    for name in (
        "q", "r", "d", "m", "lam", "eta",
        "threshold_beta", "threshold_delta", "threshold_omega",
    ):
        assert getattr(cfg, name) is not None, name
    manifest = json.loads(json.dumps(fit.manifest()))
    assert manifest["p"] == 4
    assert manifest["config"]["q"] == 0
    assert manifest["factor_method"] == {"q": "user", "r": "user"}


def test_var_stage_error_is_tagged():
    panel = noise_panel(4, 3, 40)
    config = quick_config(d=3, m=2)
    with pytest.raises(ValueError, match="var stage: bandwidth 2 below"):
        fnets_estimate(panel, config)


def test_tuning_stage_error_when_no_order_fits():
    panel = noise_panel(5, 5, 10)
    with pytest.raises(ValueError, match="tuning stage: no VAR order"):
        fnets_estimate(panel, RunConfig(q=0, m=6))


def test_feasible_orders():
    assert feasible_orders(noise_panel(6, 3, 40), 1) == [1, 2, 3, 4, 5]
    assert feasible_orders(noise_panel(6, 3, 12), 1) == [1]
    assert feasible_orders(noise_panel(6, 5, 10), 1) == []


def test_cv_train_ratio():
    assert cv_train_ratio(10, 1) == 0.5
    assert cv_train_ratio(9, 1) == pytest.approx(5.0 / 9.0)
    assert cv_train_ratio(10, 3) == pytest.approx(5.0 / 30.0)


def test_innovation_cv_pairs_shapes():
    panel = noise_panel(7, 3, 60)
    pairs = innovation_cv_pairs(panel, 0, 1, 1e6, "lasso", 1)
    assert len(pairs) == 1
    train, test = pairs[0]
    assert train.shape == (3, 3) and test.shape == (3, 3)
    np.testing.assert_allclose(train, train.T, atol=1e-12)
    with pytest.raises(ValueError, match="set eta explicitly"):
        innovation_cv_pairs(panel, 0, 9, 0.5, "lasso", 1)


def test_forecast_validates_arguments():
    panel = noise_panel(8, 3, 60)
    fit = fnets_estimate(panel, quick_config())
    with pytest.raises(ValueError, match="unknown method"):
        fnets_forecast(fit, panel, 1, method="both")
    with pytest.raises(ValueError, match="horizon"):
        fnets_forecast(fit, panel, 0)


def test_forecast_assembles_components():
    panel = noise_panel(9, 4, 80)
    fit = fnets_estimate(panel, quick_config())
    fc = fnets_forecast(fit, panel, 3)
    assert fc.x_fc.shape == (3, 4)
    np.testing.assert_array_equal(fc.x_fc, fc.chi_fc + fc.xi_fc)
    assert fc.horizons == 3
    assert fc.method == "restricted"


def test_forecast_q_zero_is_pure_idio():
    panel = noise_panel(10, 4, 80)
    fit = fnets_estimate(panel, quick_config())
    for method in ("restricted", "unrestricted"):
        fc = fnets_forecast(fit, panel, 2, method=method, K=5, n_perm=2)
        np.testing.assert_array_equal(fc.chi_fc, np.zeros((2, 4)))
        np.testing.assert_array_equal(fc.insample_chi, np.zeros((4, 80)))
        np.testing.assert_array_equal(fc.x_fc, fc.xi_fc)


def test_forecast_dead_var_and_no_factors_predicts_zero():
    panel = noise_panel(11, 3, 60)
    fit = fnets_estimate(panel, quick_config(lam=1e6))
    np.testing.assert_array_equal(fit.var.beta, np.zeros((3, 3)))
    fc = fnets_forecast(fit, panel, 2)
    np.testing.assert_array_equal(fc.x_fc, np.zeros((2, 3)))


def test_forecast_thresholded_flag_uses_pruned_coefficients():
    spec = DgpSpec(common="C0", idio="E1", n=300, p=5, q=0, seed=12)
    panel = demeaned_panel(simulate_panel(spec).x)
    big = 1.0
    fit = fnets_estimate(panel, quick_config(lam=0.1, threshold_beta=big))
    assert np.abs(fit.var.beta).max() < big
    assert np.abs(fit.var.beta).max() > 0.0
    pruned = fnets_forecast(fit, panel, 1, thresholded=True)
    np.testing.assert_array_equal(pruned.xi_fc, np.zeros((1, 5)))
    free = fnets_forecast(fit, panel, 1)
    assert np.abs(free.xi_fc).max() > 0.0


def test_forecast_deterministic_unrestricted():
    spec = DgpSpec(common="C1", idio="E1", n=150, p=6, q=1, seed=13)
    panel = demeaned_panel(simulate_panel(spec).x)
    fit = fnets_estimate(panel, quick_config(q=1, r=1))
    a = fnets_forecast(fit, panel, 2, method="unrestricted", K=6, n_perm=3)
    b = fnets_forecast(fit, panel, 2, method="unrestricted", K=6, n_perm=3)
    np.testing.assert_array_equal(a.x_fc, b.x_fc)
    np.testing.assert_array_equal(a.insample_chi, b.insample_chi)


def test_restricted_beats_unrestricted_on_static_factors():
    # C2 has an exact static representation, so the eigen-projection
    # should track the true common component at least as well as the
    # truncated dynamic expansion in most replications
    wins = 0
    reps = 20
    for seed in range(reps):
        spec = DgpSpec(common="C2", idio="E1", n=200, p=10, q=2, seed=seed)
        draw = simulate_panel(spec)
        panel = demeaned_panel(draw.x)
        fit = fnets_estimate(panel, quick_config(q=2))
        scale = np.linalg.norm(draw.chi)
        errs = {}
        for method in ("restricted", "unrestricted"):
            fc = fnets_forecast(
                fit, panel, 1, method=method, K=10, n_perm=5
            )
            errs[method] = np.linalg.norm(fc.insample_chi - draw.chi) / scale
        wins += errs["restricted"] <= errs["unrestricted"]
    assert wins >= int(0.6 * reps)
