"""Registry of the published simulation-study scenarios.

One place pins, for every study id, the slope design, error design,
covariance estimator and (N, T) grid, so golden regression tests and the
CLI ``table`` command share a single source of truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence


from .covariance import (
    HAC,
    AR1Parametric,
    Banded,
    HeteroScaled,
    SigmaSpec,
    abs_first_component,
)
from .exceptions import UnknownTable
from .simulate import (
    AR1Errors,
    ErrorDesign,
    HalfSplit,
    HeteroAR1Errors,
    HeteroErrors,
    Homogeneous,
    IIDNormal,
    ScenarioConfig,
    SlopeDesign,
)

STANDARD_T = (10, 15, 20, 25, 30, 40, 60, 80)
HETERO_T = (10, 15, 20, 25, 30, 40, 60, 80, 100)
SHORT_T = (10, 15, 20, 25, 30, 40, 60)
HAC_T = (40, 60, 80, 100, 120, 150, 180)
STANDARD_N = (100, 500)


@dataclass(frozen=True)
class TableScenario:
    slope_design: SlopeDesign
    error_design: ErrorDesign
    sigma_spec: SigmaSpec
    fixed_effects: bool
    t_values: tuple[int, ...]


def _banded_auto() -> SigmaSpec:
    return SigmaSpec(variant=Banded(b=None))


def _banded_b1() -> SigmaSpec:
    return SigmaSpec(variant=Banded(b=1))


REGISTRY: dict[str, TableScenario] = {
    # main study
    "T1": TableScenario(Homogeneous(1.0), IIDNormal(), _banded_b1(), False, STANDARD_T),
    "T2": TableScenario(HalfSplit(1.0, 2.0), IIDNormal(), _banded_b1(), False, STANDARD_T),
    "T3": TableScenario(Homogeneous(1.0), AR1Errors(0.3), _banded_auto(), False, STANDARD_T),
    "T4": TableScenario(HalfSplit(1.0, 2.0), AR1Errors(0.3), _banded_auto(), False, STANDARD_T),
    "T5": TableScenario(Homogeneous(1.0), IIDNormal(), _banded_auto(), True, STANDARD_T),
    "T6": TableScenario(HalfSplit(1.0, 2.0), IIDNormal(), _banded_auto(), True, STANDARD_T),
    # A-series: heteroskedastic errors, unadjusted and scaled estimators
    "A7": TableScenario(Homogeneous(1.0), HeteroErrors(), _banded_b1(), False, HETERO_T),
    "A8": TableScenario(HalfSplit(1.0, 2.0), HeteroErrors(), _banded_b1(), False, HETERO_T),
    "A9": TableScenario(
        Homogeneous(1.0),
        HeteroErrors(),
        SigmaSpec(variant=HeteroScaled(scale_fn=abs_first_component, inner=Banded(b=1))),
        False,
        SHORT_T,
    ),
    "A10": TableScenario(
        HalfSplit(1.0, 2.0),
        HeteroErrors(),
        SigmaSpec(variant=HeteroScaled(scale_fn=abs_first_component, inner=Banded(b=1))),
        False,
        SHORT_T,
    ),
    # A-series: strong serial correlation, nonparametric vs parametric
    "A11": TableScenario(Homogeneous(1.0), AR1Errors(0.5), _banded_auto(), False, STANDARD_T),
    "A12": TableScenario(HalfSplit(1.0, 2.0), AR1Errors(0.5), _banded_auto(), False, STANDARD_T),
    "A13": TableScenario(
        Homogeneous(1.0), AR1Errors(0.5), SigmaSpec(variant=AR1Parametric()), False, SHORT_T
    ),
    "A14": TableScenario(
        HalfSplit(1.0, 2.0), AR1Errors(0.5), SigmaSpec(variant=AR1Parametric()), False, SHORT_T
    ),
    # A-series: heteroskedastic AR(1) errors with the HAC estimator
    "A15": TableScenario(
        Homogeneous(1.0), HeteroAR1Errors(0.3), SigmaSpec(variant=HAC(b=None)), False, HAC_T
    ),
    "A16": TableScenario(
        HalfSplit(1.0, 2.0), HeteroAR1Errors(0.3), SigmaSpec(variant=HAC(b=None)), False, HAC_T
    ),
}


def table_ids() -> list[str]:
    return list(REGISTRY)


def build_table_cells(
    table_id: str,
    reps: int = 5000,
    seed: int = 0,
    n_values: Optional[Sequence[int]] = None,
    t_values: Optional[Sequence[int]] = None,
) -> list[ScenarioConfig]:
    """Instantiate the (N, T) grid of one published study."""
    try:
        scen = REGISTRY[table_id]
    except KeyError:
        raise UnknownTable(f"unknown table id {table_id!r}; known: {', '.join(REGISTRY)}")
    cells = []
    for n in n_values if n_values is not None else STANDARD_N:
        for t in t_values if t_values is not None else scen.t_values:
            cells.append(
                ScenarioConfig(
                    n=n,
                    t_len=t,
                    reps=reps,
                    slope_design=scen.slope_design,
                    error_design=scen.error_design,
                    fixed_effects=scen.fixed_effects,
                    sigma_spec=scen.sigma_spec,
                    seed=seed,
                    scenario_id=table_id,
                )
            )
    return cells
