import numpy as np
import pytest

from poolcast.estimator import ForecastComparison
from poolcast.inference import InferenceResult
from poolcast.ols import fit_individual_ols
from poolcast.simulate import (
    HalfSplit,
    Homogeneous,
    IIDNormal,
    ScenarioConfig,
    replication_stream,
    simulate_panel,
)


def make_panel(seed=0, n=30, t_len=20, slope_design=None):
    cfg = ScenarioConfig(
        n=n,
        t_len=t_len,
        reps=1,
        slope_design=slope_design or Homogeneous(),
        error_design=IIDNormal(),
    )
    panel, _ = simulate_panel(cfg, replication_stream(seed, 0, 0))
    return panel


class TestParams:
    def test_default_params(self):
        est = ForecastComparison()
        assert est.get_params() == {
            "sigma": "banded",
            "bandwidth": None,
            "alpha": 0.05,
            "fixed_effects": False,
            "strict_paper_ci": False,
            "cross_bandwidth": 1.0,
        }

    def test_set_params_round_trip(self):
        est = ForecastComparison()
        returned = est.set_params(sigma="ar1", alpha=0.1)
        assert returned is est
        assert est.get_params()["sigma"] == "ar1"
        assert est.get_params()["alpha"] == 0.1

    def test_set_params_unknown_key(self):
        with pytest.raises(ValueError, match="frobnicate"):
            ForecastComparison().set_params(frobnicate=1)

    def test_constructor_matches_set_params(self):
        a = ForecastComparison(sigma="hac", bandwidth=3)
        b = ForecastComparison().set_params(sigma="hac", bandwidth=3)
        assert a.get_params() == b.get_params()


class TestFit:
    def test_fit_populates_attributes(self):
        est = ForecastComparison(bandwidth=1)
        returned = est.fit(make_panel())
        assert returned is est
        assert isinstance(est.result_, InferenceResult)
        assert est.decision_ == est.result_.decision
        assert est.panel_.n == 30
        assert est.slopes_.individual.shape == (30, 5)

    def test_homogeneous_panel_prefers_pooling(self):
        est = ForecastComparison(bandwidth=1)
        est.fit(make_panel(seed=3, n=100, t_len=25))
        assert est.decision_ == "pooled preferred"

    def test_fixed_effects_demeans(self):
        panel = make_panel(seed=4)
        est = ForecastComparison(bandwidth=1, fixed_effects=True)
        est.fit(panel)
        assert est.panel_.demeaned
        np.testing.assert_allclose(est.panel_.y.mean(axis=1), 0.0, atol=1e-10)
        assert "demean-adjusted" in est.result_.variant_used

    def test_unfitted_raises(self):
        est = ForecastComparison()
        with pytest.raises(AttributeError, match="fit"):
            est.predict()
        with pytest.raises(AttributeError):
            _ = est.decision_

    def test_refit_overwrites(self):
        est = ForecastComparison(bandwidth=1)
        est.fit(make_panel(seed=5, n=10, t_len=12))
        first = est.result_.point
        est.fit(make_panel(seed=6, n=10, t_len=12))
        assert est.result_.point != first


class TestPredict:
    def test_pooled_prediction_values(self):
        panel = make_panel(seed=7, n=12, t_len=15)
        est = ForecastComparison(bandwidth=1).fit(panel)
        pred = est.predict(which="pooled")
        expected = panel.x_next @ fit_individual_ols(panel).pooled
        np.testing.assert_allclose(pred, expected, rtol=1e-12)
        assert pred.shape == (12,)

    def test_individual_prediction_values(self):
        panel = make_panel(seed=8, n=12, t_len=15)
        est = ForecastComparison(bandwidth=1).fit(panel)
        pred = est.predict(which="individual")
        betas = fit_individual_ols(panel).individual
        expected = np.einsum("ik,ik->i", panel.x_next, betas)
        np.testing.assert_allclose(pred, expected, rtol=1e-12)

    def test_auto_follows_decision(self):
        panel = make_panel(seed=9, n=100, t_len=25)
        est = ForecastComparison(bandwidth=1).fit(panel)
        assert est.decision_ == "pooled preferred"
        np.testing.assert_array_equal(est.predict(), est.predict(which="pooled"))

    def test_auto_heterogeneous_individual(self):
        # strong slope split pushes the interval above zero
        panel = make_panel(seed=10, n=100, t_len=60, slope_design=HalfSplit(0.0, 4.0))
        est = ForecastComparison(bandwidth=1).fit(panel)
        assert est.decision_ == "individual preferred"
        np.testing.assert_array_equal(est.predict(), est.predict(which="individual"))

    def test_new_x_next(self):
        panel = make_panel(seed=11, n=6, t_len=12)
        est = ForecastComparison(bandwidth=1).fit(panel)
        x_new = np.full((6, 5), 2.0)
        pred = est.predict(x_new, which="pooled")
        np.testing.assert_allclose(pred, x_new @ fit_individual_ols(est.panel_).pooled, rtol=1e-12)

    def test_bad_which(self):
        est = ForecastComparison(bandwidth=1).fit(make_panel(seed=12, n=6, t_len=12))
        with pytest.raises(ValueError, match="forecast source"):
            est.predict(which="ensemble")
