"""Data ingestion and run configuration: long-format CSV panels, YAML configs.

The CSV contract is a balanced long-format panel (individual_id,
time_index, y, x1..xK) plus a companion prediction file (individual_id,
x1..xK) holding the regressors x_{i,T+1} at which forecasts are
compared. Configuration files are YAML; :func:`parse_config` and
:func:`emit_config` round-trip.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from .covariance import named_spec
from .exceptions import (
    MissingPrediction,
    NonNumericCell,
    ParseError,
    UnbalancedPanel,
    ValidationError,
)
from .panel import Panel
from .simulate import (
    AR1Errors,
    ErrorDesign,
    HalfSplit,
    HeteroAR1Errors,
    HeteroErrors,
    Homogeneous,
    IIDNormal,
    RandomNormal,
    ScenarioConfig,
    SlopeDesign,
)
from .tables import REGISTRY, build_table_cells

SIGMA_NAMES = ("banded", "ar1", "hetero", "hac", "true")


# ---------------------------------------------------------------------
# CSV panels
# ---------------------------------------------------------------------
def _parse_float(text: str, row: int, col: str) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        raise NonNumericCell(row, col)


def load_panel(panel_path: str, predict_path: str) -> Panel:
    """Read a long-format panel CSV plus its prediction companion.

    Individuals are ordered by first appearance in the panel file; every
    individual must cover the same contiguous time indices.
    """
    with open(panel_path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        x_cols = [c for c in fields if c.startswith("x")]
        if not {"individual_id", "time_index", "y"} <= set(fields) or not x_cols:
            raise ParseError(
                f"{panel_path}: expected columns individual_id,time_index,y,x1..xK"
            )
        order: list[str] = []
        rows: dict[str, list[tuple[int, float, list[float]]]] = {}
        for lineno, rec in enumerate(reader, start=2):
            ind = rec["individual_id"]
            if ind not in rows:
                order.append(ind)
                rows[ind] = []
            t_idx = _parse_float(rec["time_index"], lineno, "time_index")
            if t_idx != int(t_idx):
                raise NonNumericCell(lineno, "time_index")
            y_val = _parse_float(rec["y"], lineno, "y")
            x_val = [_parse_float(rec[c], lineno, c) for c in x_cols]
            rows[ind].append((int(t_idx), y_val, x_val))

    if not order:
        raise ParseError(f"{panel_path}: no data rows")
    t_len = len(rows[order[0]])
    times0 = sorted(t for t, _, _ in rows[order[0]])
    if times0 != list(range(times0[0], times0[0] + t_len)):
        raise UnbalancedPanel(order[0])
    for ind in order:
        times = sorted(t for t, _, _ in rows[ind])
        if times != times0:
            raise UnbalancedPanel(ind)

    n, k = len(order), len(x_cols)
    x = np.empty((n, t_len, k))
    y = np.empty((n, t_len))
    for i, ind in enumerate(order):
        for t_idx, y_val, x_val in sorted(rows[ind]):
            pos = t_idx - times0[0]
            y[i, pos] = y_val
            x[i, pos] = x_val

    with open(predict_path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "individual_id" not in fields or not all(c in fields for c in x_cols):
            raise ParseError(
                f"{predict_path}: expected columns individual_id,{','.join(x_cols)}"
            )
        preds: dict[str, list[float]] = {}
        for lineno, rec in enumerate(reader, start=2):
            preds[rec["individual_id"]] = [
                _parse_float(rec[c], lineno, c) for c in x_cols
            ]
    x_next = np.empty((n, k))
    for i, ind in enumerate(order):
        if ind not in preds:
            raise MissingPrediction(ind)
        x_next[i] = preds[ind]

    return Panel(x=x, y=y, x_next=x_next)


def write_panel(panel: Panel, panel_path: str, predict_path: str) -> None:
    """Write a Panel in the long-format CSV contract (full float precision)."""
    x_cols = [f"x{j + 1}" for j in range(panel.k)]
    with open(panel_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["individual_id", "time_index", "y"] + x_cols)
        for i in range(panel.n):
            for t in range(panel.t_len):
                writer.writerow(
                    [i, t, repr(float(panel.y[i, t]))]
                    + [repr(float(v)) for v in panel.x[i, t]]
                )
    with open(predict_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["individual_id"] + x_cols)
        for i in range(panel.n):
            writer.writerow([i] + [repr(float(v)) for v in panel.x_next[i]])


# ---------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------
@dataclass(frozen=True)
class RunConfig:
    """Validated contents of a YAML run configuration."""

    command: str
    scenario_name: str = ""
    n: Optional[int] = None
    t_len: Optional[int] = None
    k: int = 5
    reps: int = 5000
    alpha: float = 0.05
    seed: int = 0
    slope_design: SlopeDesign = field(default_factory=Homogeneous)
    error_design: ErrorDesign = field(default_factory=IIDNormal)
    fixed_effects: bool = False
    sigma: str = "banded"
    bandwidth: Optional[int] = None
    table_id: str = ""
    panel_path: Optional[str] = None
    predict_path: Optional[str] = None
    output_path: Optional[str] = None
    threads: Optional[int] = None


_SLOPE_KINDS = {
    "homogeneous": Homogeneous,
    "half_split": HalfSplit,
    "random_normal": RandomNormal,
}
_ERROR_KINDS = {
    "iid": IIDNormal,
    "ar1": AR1Errors,
    "hetero": HeteroErrors,
    "hetero_ar1": HeteroAR1Errors,
}


def _check_phi(value) -> float:
    phi = float(value)
    if not -1.0 < phi < 1.0:
        raise ValidationError("phi out of (-1,1)")
    return phi


def _parse_slope_design(node) -> SlopeDesign:
    if isinstance(node, str):
        kind, params = node, {}
    elif isinstance(node, dict):
        kind = node.get("kind", "")
        params = {k: v for k, v in node.items() if k != "kind"}
    else:
        raise ValidationError(f"bad slope_design: {node!r}")
    if kind not in _SLOPE_KINDS:
        raise ValidationError(f"unknown slope_design kind {kind!r}")
    try:
        return _SLOPE_KINDS[kind](**{k: float(v) for k, v in params.items()})
    except TypeError as exc:
        raise ValidationError(f"bad slope_design parameters: {exc}")


def _parse_error_design(node) -> ErrorDesign:
    if isinstance(node, str):
        kind, params = node, {}
    elif isinstance(node, dict):
        kind = node.get("kind", "")
        params = {k: v for k, v in node.items() if k != "kind"}
    else:
        raise ValidationError(f"bad error_design: {node!r}")
    if kind not in _ERROR_KINDS:
        raise ValidationError(f"unknown error_design kind {kind!r}")
    if "phi" in params:
        params["phi"] = _check_phi(params["phi"])
    try:
        return _ERROR_KINDS[kind](**params)
    except TypeError as exc:
        raise ValidationError(f"bad error_design parameters: {exc}")


def _design_node(design) -> dict:
    kind = {v: k for k, v in {**_SLOPE_KINDS, **_ERROR_KINDS}.items()}[type(design)]
    node = {"kind": kind}
    for name in getattr(design, "__dataclass_fields__", {}):
        node[name] = getattr(design, name)
    return node


def parse_config(text: str) -> RunConfig:
    """Parse and validate YAML configuration text."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"bad YAML: {exc}")
    if not isinstance(doc, dict):
        raise ParseError("configuration must be a YAML mapping")
    command = doc.get("command")
    if command not in ("simulate", "analyze", "table"):
        raise ValidationError(f"unknown command {command!r}")

    scen = doc.get("scenario") or {}
    if not isinstance(scen, dict):
        raise ParseError("scenario must be a mapping")
    name = str(scen.get("name", ""))
    if name and name not in REGISTRY:
        raise ValidationError(f"unknown scenario name {name!r}")
    if command == "simulate" and not name and "n" not in scen:
        raise ValidationError("simulate needs a scenario name or explicit n/t_len")
    table_id = str(doc.get("table_id", ""))
    if command == "table" and not table_id:
        raise ValidationError("table command needs table_id")

    alpha = float(scen.get("alpha", 0.05))
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha out of (0,1)")
    reps = int(scen.get("reps", 5000))
    if reps < 1:
        raise ValidationError("reps must be >= 1")
    sigma = str(scen.get("sigma", "banded"))
    if sigma not in SIGMA_NAMES:
        raise ValidationError(f"unknown sigma variant {sigma!r}")

    kwargs = dict(
        command=command,
        scenario_name=name,
        n=int(scen["n"]) if "n" in scen else None,
        t_len=int(scen["t_len"]) if "t_len" in scen else None,
        k=int(scen.get("k", 5)),
        reps=reps,
        alpha=alpha,
        seed=int(doc.get("seed", scen.get("seed", 0))),
        fixed_effects=bool(scen.get("fixed_effects", False)),
        sigma=sigma,
        bandwidth=int(scen["bandwidth"]) if scen.get("bandwidth") is not None else None,
        table_id=table_id,
        panel_path=doc.get("panel"),
        predict_path=doc.get("predict"),
        output_path=doc.get("out"),
        threads=int(doc["threads"]) if doc.get("threads") is not None else None,
    )
    if "slope_design" in scen:
        kwargs["slope_design"] = _parse_slope_design(scen["slope_design"])
    if "error_design" in scen:
        kwargs["error_design"] = _parse_error_design(scen["error_design"])
    return RunConfig(**kwargs)


def emit_config(cfg: RunConfig) -> str:
    """Serialize a RunConfig back to YAML; parse_config inverts this."""
    scen: dict = {}
    if cfg.scenario_name:
        scen["name"] = cfg.scenario_name
    if cfg.n is not None:
        scen["n"] = cfg.n
    if cfg.t_len is not None:
        scen["t_len"] = cfg.t_len
    scen.update(
        k=cfg.k,
        reps=cfg.reps,
        alpha=cfg.alpha,
        fixed_effects=cfg.fixed_effects,
        sigma=cfg.sigma,
        slope_design=_design_node(cfg.slope_design),
        error_design=_design_node(cfg.error_design),
    )
    if cfg.bandwidth is not None:
        scen["bandwidth"] = cfg.bandwidth
    doc: dict = {"command": cfg.command, "seed": cfg.seed, "scenario": scen}
    if cfg.table_id:
        doc["table_id"] = cfg.table_id
    for key, value in (
        ("panel", cfg.panel_path),
        ("predict", cfg.predict_path),
        ("out", cfg.output_path),
        ("threads", cfg.threads),
    ):
        if value is not None:
            doc[key] = value
    return yaml.safe_dump(doc, sort_keys=False)


def build_cells(cfg: RunConfig) -> list[ScenarioConfig]:
    """Instantiate the simulation cells a RunConfig describes."""
    if cfg.scenario_name:
        scen = REGISTRY[cfg.scenario_name]
        if cfg.n is None or cfg.t_len is None:
            return build_table_cells(
                cfg.scenario_name,
                reps=cfg.reps,
                seed=cfg.seed,
                n_values=None if cfg.n is None else [cfg.n],
                t_values=None if cfg.t_len is None else [cfg.t_len],
            )
        slope_design, error_design = scen.slope_design, scen.error_design
        sigma_spec = scen.sigma_spec
        fixed_effects = scen.fixed_effects
    else:
        slope_design, error_design = cfg.slope_design, cfg.error_design
        sigma_spec = named_spec(cfg.sigma, cfg.bandwidth)
        fixed_effects = cfg.fixed_effects
    return [
        ScenarioConfig(
            n=cfg.n,
            t_len=cfg.t_len,
            k=cfg.k,
            reps=cfg.reps,
            alpha=cfg.alpha,
            slope_design=slope_design,
            error_design=error_design,
            fixed_effects=fixed_effects,
            sigma_spec=sigma_spec,
            seed=cfg.seed,
            scenario_id=cfg.scenario_name or "custom",
        )
    ]
