"""Pooled vs individual OLS forecast comparison for large panels.

The package computes, for a balanced panel and user-chosen prediction
regressors, a confidence interval for the difference between the mean
squared forecast errors of the pooled and the per-individual OLS slope
estimators, and ships the Monte Carlo harness that validates the
interval's coverage.
"""

from .covariance import (
    HAC,
    AR1Parametric,
    Banded,
    HeteroScaled,
    SigmaSpec,
    TrueSigma,
    default_bandwidth,
    named_spec,
)
from .covstruct import AR1Time, DenseCross, DenseTime, DiagonalCross, IdentityCross, IdentityTime
from .estimator import ForecastComparison
from .exceptions import PoolcastError
from .inference import InferenceResult, KernelSpec, confidence_interval, run_inference
from .io import RunConfig, build_cells, emit_config, load_panel, parse_config, write_panel
from .ols import SlopeEstimates, fit_individual_ols, fit_pooled_ols, residuals
from .oracle import (
    ErrorDecomposition,
    TrueModel,
    decompose_errors,
    individual_error,
    oracle_tau,
    pooled_error,
)
from .panel import Panel, within_demean
from .simulate import (
    AR1Errors,
    HalfSplit,
    HeteroAR1Errors,
    HeteroErrors,
    Homogeneous,
    IIDNormal,
    RandomNormal,
    ScenarioConfig,
    StudySummary,
    emit_table,
    run_replication,
    run_study,
    simulate_panel,
)
from .tables import REGISTRY, build_table_cells, table_ids

__all__ = [
    "AR1Errors",
    "AR1Parametric",
    "AR1Time",
    "Banded",
    "DenseCross",
    "DenseTime",
    "DiagonalCross",
    "ErrorDecomposition",
    "ForecastComparison",
    "HAC",
    "HalfSplit",
    "HeteroAR1Errors",
    "HeteroErrors",
    "HeteroScaled",
    "Homogeneous",
    "IIDNormal",
    "IdentityCross",
    "IdentityTime",
    "InferenceResult",
    "KernelSpec",
    "Panel",
    "PoolcastError",
    "RandomNormal",
    "REGISTRY",
    "RunConfig",
    "ScenarioConfig",
    "SigmaSpec",
    "SlopeEstimates",
    "StudySummary",
    "TrueModel",
    "TrueSigma",
    "build_cells",
    "build_table_cells",
    "confidence_interval",
    "decompose_errors",
    "default_bandwidth",
    "emit_config",
    "emit_table",
    "fit_individual_ols",
    "fit_pooled_ols",
    "individual_error",
    "load_panel",
    "named_spec",
    "oracle_tau",
    "parse_config",
    "pooled_error",
    "residuals",
    "run_inference",
    "run_replication",
    "run_study",
    "simulate_panel",
    "table_ids",
    "within_demean",
    "write_panel",
]

__version__ = "0.1.0"
