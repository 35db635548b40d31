"""Monte Carlo harness: data generation, coverage replications, studies.

Each replication draws a fresh panel, computes the exact forecast-error
gap from the known truth, and checks whether the feasible interval and
the infeasible benchmark (true tau, true covariances) cover it.
Replications are keyed by (seed, cell, rep) through a counter-based
Philox stream, so results are reproducible and independent of how work
is distributed over processes.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from .covariance import Banded, SigmaSpec
from .covstruct import AR1Time, IdentityTime
from .exceptions import DegenerateVariance
from .inference import (
    KernelSpec,
    confidence_interval,
    e1_hat,
    e_hat,
    normal_quantile,
    tau_hat,
)
from .ols import fit_individual_ols, residuals
from .oracle import TrueModel, decompose_errors, oracle_tau
from .panel import Panel, within_demean

THREADS_ENV = "PANEL_MSFE_THREADS"


# ---------------------------------------------------------------------
# scenario configuration
# ---------------------------------------------------------------------
@dataclass(frozen=True)
class Homogeneous:
    value: float = 1.0


@dataclass(frozen=True)
class HalfSplit:
    """All slope components equal ``lo`` for the first half of individuals."""

    lo: float = 1.0
    hi: float = 2.0


@dataclass(frozen=True)
class RandomNormal:
    mean: float = 0.0
    sd: float = 1.0


SlopeDesign = Homogeneous | HalfSplit | RandomNormal


@dataclass(frozen=True)
class IIDNormal:
    pass


@dataclass(frozen=True)
class AR1Errors:
    phi: float = 0.3


@dataclass(frozen=True)
class HeteroErrors:
    """errors = |first regressor component| * iid standard normal."""


@dataclass(frozen=True)
class HeteroAR1Errors:
    phi: float = 0.3


ErrorDesign = IIDNormal | AR1Errors | HeteroErrors | HeteroAR1Errors


@dataclass(frozen=True)
class ScenarioConfig:
    n: int
    t_len: int
    k: int = 5
    reps: int = 5000
    alpha: float = 0.05
    slope_design: SlopeDesign = field(default_factory=Homogeneous)
    error_design: ErrorDesign = field(default_factory=IIDNormal)
    fixed_effects: bool = False
    sigma_spec: SigmaSpec = field(default_factory=lambda: SigmaSpec(variant=Banded(b=1)))
    kernel: KernelSpec = field(default_factory=KernelSpec)
    seed: int = 0
    fix_x_next: bool = False
    scenario_id: str = ""

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.t_len <= self.k:
            raise ValueError("need t_len > k")
        phi = getattr(self.error_design, "phi", None)
        if phi is not None and not -1.0 < phi < 1.0:
            raise ValueError(f"phi {phi} outside (-1, 1)")


@dataclass(frozen=True)
class ReplicationRecord:
    truth_diff: float
    feasible_covered: bool
    feasible_length: float
    infeasible_covered: bool
    infeasible_length: float
    degenerate: bool = False


@dataclass(frozen=True)
class CellSummary:
    scenario_id: str
    n: int
    t_len: int
    cov_feasible: float
    len_feasible: float
    cov_infeasible: float
    len_infeasible: float
    mc_se: float
    reps: int
    degenerate_count: int = 0


@dataclass(frozen=True)
class StudySummary:
    cells: tuple[CellSummary, ...]


# ---------------------------------------------------------------------
# random streams
# ---------------------------------------------------------------------
def replication_stream(seed: int, cell: int, rep: int) -> np.random.Generator:
    """Counter-based stream for one replication.

    The Philox key derives from SeedSequence([seed, cell, rep]); any two
    distinct (cell, rep) pairs yield statistically independent streams.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, cell, rep])))


# ---------------------------------------------------------------------
# data generation
# ---------------------------------------------------------------------
def _draw_slopes(design: SlopeDesign, n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(design, Homogeneous):
        return np.full((n, k), design.value)
    if isinstance(design, HalfSplit):
        betas = np.full((n, k), design.hi)
        betas[: n // 2] = design.lo
        return betas
    if isinstance(design, RandomNormal):
        return rng.normal(design.mean, design.sd, size=(n, k))
    raise TypeError(f"unknown slope design: {design!r}")


def _ar1_path(n: int, t_len: int, phi: float, rng: np.random.Generator) -> np.ndarray:
    """Stationary AR(1) innovations path, started at N(0, 1/(1-phi^2))."""
    u = rng.standard_normal((n, t_len))
    out = np.empty((n, t_len))
    out[:, 0] = u[:, 0] / math.sqrt(1.0 - phi**2)
    for t in range(1, t_len):
        out[:, t] = phi * out[:, t - 1] + u[:, t]
    return out


def simulate_panel(
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    x_next_override: Optional[np.ndarray] = None,
) -> tuple[Panel, TrueModel]:
    """Draw one panel and the matching ground truth.

    Draw order is fixed (x, x_next, slopes, errors, fixed effects) so
    that identical streams produce bit-identical panels.
    """
    n, t_len, k = cfg.n, cfg.t_len, cfg.k
    x = rng.normal(1.0, 1.0, size=(n, t_len, k))
    x_next = rng.normal(1.0, 1.0, size=(n, k))
    if x_next_override is not None:
        x_next = x_next_override
    betas = _draw_slopes(cfg.slope_design, n, k, rng)

    design = cfg.error_design
    omega = None
    omega_next = None
    if isinstance(design, IIDNormal):
        eps = rng.standard_normal((n, t_len))
        sigma_t = IdentityTime()
    elif isinstance(design, AR1Errors):
        eps = _ar1_path(n, t_len, design.phi, rng)
        sigma_t = AR1Time(design.phi)
    elif isinstance(design, HeteroErrors):
        u = rng.standard_normal((n, t_len))
        omega = np.abs(x[:, :, 0])
        omega_next = np.abs(x_next[:, 0])
        eps = omega * u
        sigma_t = IdentityTime()
    elif isinstance(design, HeteroAR1Errors):
        u = _ar1_path(n, t_len, design.phi, rng)
        omega = np.abs(x[:, :, 0])
        omega_next = np.abs(x_next[:, 0])
        eps = omega * u
        sigma_t = AR1Time(design.phi)
    else:
        raise TypeError(f"unknown error design: {design!r}")

    y = np.einsum("itk,ik->it", x, betas) + eps
    if cfg.fixed_effects:
        # individual effect correlated with the regressors through the
        # scalar mean of the time-averaged regressor vector
        x_bar_scalar = x.mean(axis=(1, 2))
        alpha_i = rng.normal(x_bar_scalar, 1.0)
        y = y + alpha_i[:, None]

    panel = Panel(x=x, y=y, x_next=x_next)
    truth = TrueModel(betas=betas, sigma_t=sigma_t, omega=omega, omega_next=omega_next)
    return panel, truth


# ---------------------------------------------------------------------
# replications
# ---------------------------------------------------------------------
def run_replication(
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    x_next_override: Optional[np.ndarray] = None,
) -> ReplicationRecord:
    """One coverage draw: feasible CI and infeasible benchmark vs truth."""
    panel, truth = simulate_panel(cfg, rng, x_next_override)
    if cfg.fixed_effects:
        panel = within_demean(panel)
        truth = replace(truth, demeaned=True)

    dec = decompose_errors(panel, truth)
    truth_diff = dec.e2 + dec.e3 - dec.e1

    slopes = fit_individual_ols(panel)
    resids = residuals(panel, slopes)
    ehat = e_hat(panel, slopes)

    spec = cfg.sigma_spec
    if panel.demeaned and not spec.demean_adjust:
        spec = replace(spec, demean_adjust=True)
    e1, _ = e1_hat(panel, resids, spec)
    tau_sq, degenerate = tau_hat(panel, slopes, resids, spec, cfg.kernel)
    feasible = confidence_interval(ehat, e1, tau_sq, panel.n, panel.t_len, cfg.alpha)

    z = normal_quantile(1.0 - cfg.alpha / 2.0)
    try:
        tau_star = oracle_tau(panel, truth)
        half = z * math.sqrt(tau_star) / (math.sqrt(panel.n) * panel.t_len)
        point = ehat - 2.0 * dec.e1
        inf_covered = point - half <= truth_diff <= point + half
        inf_length = 2.0 * half
    except DegenerateVariance:
        degenerate = True
        inf_covered = False
        inf_length = 0.0

    return ReplicationRecord(
        truth_diff=truth_diff,
        feasible_covered=bool(feasible.lo <= truth_diff <= feasible.hi),
        feasible_length=feasible.hi - feasible.lo,
        infeasible_covered=bool(inf_covered),
        infeasible_length=inf_length,
        degenerate=degenerate,
    )


def _run_chunk(cfg: ScenarioConfig, cell: int, rep_indices, x_next_fixed) -> list[tuple]:
    out = []
    for rep in rep_indices:
        rng = replication_stream(cfg.seed, cell, rep)
        rec = run_replication(cfg, rng, x_next_fixed)
        out.append(
            (
                rec.feasible_covered,
                rec.feasible_length,
                rec.infeasible_covered,
                rec.infeasible_length,
                rec.degenerate,
            )
        )
    return out


def resolve_threads(threads: Optional[int] = None) -> int:
    """--threads value, PANEL_MSFE_THREADS, or all cores, in that order."""
    if threads is not None and threads > 0:
        return threads
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_study(
    cells: Sequence[ScenarioConfig],
    threads: Optional[int] = None,
    chunk_size: int = 50,
) -> StudySummary:
    """Run every cell's replications and aggregate coverage statistics.

    Aggregation iterates records in replication order, so the summary is
    identical for any thread count.
    """
    n_jobs = resolve_threads(threads)
    summaries = []
    for cell_idx, cfg in enumerate(cells):
        x_next_fixed = None
        if cfg.fix_x_next:
            rng = replication_stream(cfg.seed, cell_idx, 2**31 - 1)
            x_next_fixed = rng.normal(1.0, 1.0, size=(cfg.n, cfg.k))
        chunks = [
            range(start, min(start + chunk_size, cfg.reps))
            for start in range(0, cfg.reps, chunk_size)
        ]
        if n_jobs == 1 or len(chunks) == 1:
            results = [_run_chunk(cfg, cell_idx, ch, x_next_fixed) for ch in chunks]
        else:
            results = Parallel(n_jobs=n_jobs)(
                delayed(_run_chunk)(cfg, cell_idx, ch, x_next_fixed) for ch in chunks
            )
        rows = np.array([row for chunk in results for row in chunk], dtype=float)
        cov_f = float(rows[:, 0].mean())
        summaries.append(
            CellSummary(
                scenario_id=cfg.scenario_id,
                n=cfg.n,
                t_len=cfg.t_len,
                cov_feasible=cov_f,
                len_feasible=float(rows[:, 1].mean()),
                cov_infeasible=float(rows[:, 2].mean()),
                len_infeasible=float(rows[:, 3].mean()),
                mc_se=math.sqrt(cov_f * (1.0 - cov_f) / cfg.reps),
                reps=cfg.reps,
                degenerate_count=int(rows[:, 4].sum()),
            )
        )
    return StudySummary(cells=tuple(summaries))


# ---------------------------------------------------------------------
# output
# ---------------------------------------------------------------------
CSV_HEADER = "scenario,N,T,cov_feasible,len_feasible,cov_infeasible,len_infeasible,mc_se,reps"


def emit_table(summary: StudySummary, fmt: str = "csv") -> str:
    """Render a study as CSV or as an aligned text table (rows T, groups N)."""
    if fmt == "csv":
        lines = [CSV_HEADER]
        for c in summary.cells:
            lines.append(
                f"{c.scenario_id},{c.n},{c.t_len},{c.cov_feasible:.4f},"
                f"{c.len_feasible:.4f},{c.cov_infeasible:.4f},{c.len_infeasible:.4f},"
                f"{c.mc_se:.4f},{c.reps}"
            )
        return "\n".join(lines) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    n_values = sorted({c.n for c in summary.cells})
    t_values = sorted({c.t_len for c in summary.cells})
    by_key = {(c.n, c.t_len): c for c in summary.cells}
    header = "T    " + "   ".join(
        f"| N={n}: cov_f  len_f  cov_i  len_i" for n in n_values
    )
    lines = [header, "-" * len(header)]
    for t in t_values:
        parts = [f"{t:<5d}"]
        for n in n_values:
            c = by_key.get((n, t))
            if c is None:
                parts.append("|      -      -      -      -    ")
            else:
                parts.append(
                    f"| {c.cov_feasible:.4f} {c.len_feasible:6.4f} "
                    f"{c.cov_infeasible:.4f} {c.len_infeasible:6.4f}"
                )
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
