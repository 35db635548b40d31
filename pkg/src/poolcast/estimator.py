"""High-level estimator with a scikit-learn flavored interface.

``ForecastComparison`` bundles the whole pipeline — OLS fits, error
covariance estimation, the confidence interval for the forecast-error
gap, and the resulting model choice — behind fit/predict/get_params.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .covariance import named_spec
from .inference import InferenceResult, KernelSpec, run_inference
from .ols import SlopeEstimates, fit_individual_ols
from .panel import Panel, within_demean

_PARAM_NAMES = (
    "sigma",
    "bandwidth",
    "alpha",
    "fixed_effects",
    "strict_paper_ci",
    "cross_bandwidth",
)


class ForecastComparison:
    """Decide between pooled and individual OLS slopes for forecasting.

    Parameters
    ----------
    sigma : str
        Error covariance estimator: "banded", "ar1", "hetero", "hac" or
        "true" (identity benchmark).
    bandwidth : int, optional
        Banding/HAC bandwidth b; None selects T^(2/7).
    alpha : float
        Nominal non-coverage of the interval.
    fixed_effects : bool
        Apply the within transformation before fitting (with the
        matching covariance adjustment).
    strict_paper_ci : bool
        Use the alpha/1-alpha quantile pair instead of alpha/2.
    cross_bandwidth : float
        Cross-sectional kernel bandwidth b'; 1.0 keeps only i = k pairs.
    """

    def __init__(
        self,
        sigma: str = "banded",
        bandwidth: Optional[int] = None,
        alpha: float = 0.05,
        fixed_effects: bool = False,
        strict_paper_ci: bool = False,
        cross_bandwidth: float = 1.0,
    ):
        self.sigma = sigma
        self.bandwidth = bandwidth
        self.alpha = alpha
        self.fixed_effects = fixed_effects
        self.strict_paper_ci = strict_paper_ci
        self.cross_bandwidth = cross_bandwidth

    # -- scikit-learn parameter protocol -------------------------------
    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in _PARAM_NAMES}

    def set_params(self, **params) -> "ForecastComparison":
        for name, value in params.items():
            if name not in _PARAM_NAMES:
                raise ValueError(f"unknown parameter {name!r}")
            setattr(self, name, value)
        return self

    # -- fitting --------------------------------------------------------
    def fit(self, panel: Panel) -> "ForecastComparison":
        """Fit both estimators and build the interval for E_pool - E_ind."""
        if self.fixed_effects and not panel.demeaned:
            panel = within_demean(panel)
        spec = named_spec(self.sigma, self.bandwidth)
        kernel = KernelSpec(b_prime=self.cross_bandwidth)
        self.panel_: Panel = panel
        self.slopes_: SlopeEstimates = fit_individual_ols(panel)
        self.result_: InferenceResult = run_inference(
            panel,
            spec=spec,
            kernel=kernel,
            alpha=self.alpha,
            strict_paper_ci=self.strict_paper_ci,
        )
        self.decision_: str = self.result_.decision
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "result_"):
            raise AttributeError("call fit() before using this estimator")

    # -- prediction -----------------------------------------------------
    def predict(self, x_next: Optional[np.ndarray] = None, which: str = "auto") -> np.ndarray:
        """One-step forecasts x_{i,T+1}'beta for each individual.

        ``which`` selects the slopes: "pooled", "individual", or "auto"
        to follow the fitted decision (inconclusive falls back to the
        pooled fit, the conservative choice under homogeneity).
        """
        self._check_fitted()
        if x_next is None:
            x_next = self.panel_.x_next
        x_next = np.asarray(x_next, dtype=float)
        if which == "auto":
            which = "individual" if self.decision_ == "individual preferred" else "pooled"
        if which == "pooled":
            return x_next @ self.slopes_.pooled
        if which == "individual":
            return np.einsum("ik,ik->i", x_next, self.slopes_.individual)
        raise ValueError(f"unknown forecast source {which!r}")
