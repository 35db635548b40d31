"""End-to-end validation against the reference targets.

Each check prints one machine-greppable verdict line of the form
``criterion <k>[ (part)]: PASS|FAIL - <detail>`` before asserting, so a
plain ``pytest -v -s`` run yields a readable scorecard.

The heavy Monte Carlo cells are cached at module level so criteria that
share a cell only pay for it once.  The full module takes on the order of
fifteen minutes on a single core.
"""

import math
import subprocess
import sys
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import stats

from poolcast.covariance import Banded, SigmaSpec, default_bandwidth
from poolcast.covstruct import AR1Time
from poolcast.inference import e1_hat, e_hat
from poolcast.ols import fit_individual_ols, residuals
from poolcast.oracle import TrueModel, decompose_errors, individual_error, oracle_tau, pooled_error
from poolcast.panel import Panel
from poolcast.simulate import (
    AR1Errors,
    HalfSplit,
    Homogeneous,
    IIDNormal,
    ScenarioConfig,
    replication_stream,
    run_study,
    simulate_panel,
)
from poolcast.tables import build_table_cells


def report(num, ok, detail):
    verdict = "PASS" if ok else "FAIL"
    print(f"\ncriterion {num}: {verdict} - {detail}", flush=True)
    assert ok, f"criterion {num}: {detail}"


@lru_cache(maxsize=None)
def run_cell(table_id, n, t_len, reps=5000):
    cells = build_table_cells(table_id, reps=reps, n_values=[n], t_values=[t_len])
    return run_study(cells, threads=1).cells[0]


class TestCriterion01:
    def test_closed_form_msfe_matches_monte_carlo(self):
        """Closed-form conditional forecast errors vs 2e5 fresh error draws."""
        start = time.perf_counter()
        n, t_len, k, phi = 5, 10, 2, 0.3
        reps = 200_000
        rng = np.random.default_rng(8)
        panel = Panel(
            x=rng.normal(1.0, 1.0, (n, t_len, k)),
            y=np.zeros((n, t_len)),
            x_next=rng.normal(1.0, 1.0, (n, k)),
        )
        betas = rng.normal(size=(n, k))
        truth = TrueModel(betas=betas, sigma_t=AR1Time(phi))

        chol = np.linalg.cholesky(AR1Time(phi).materialize(t_len))
        var_next = AR1Time(phi).top_left(t_len)
        grams = np.einsum("itj,itl->ijl", panel.x, panel.x)
        s_mat = grams.sum(axis=0)
        mean_y = np.einsum("itk,ik->it", panel.x, betas)

        eps = np.einsum("st,rnt->rns", chol, rng.standard_normal((reps, n, t_len)))
        eps_next = np.sqrt(var_next) * rng.standard_normal((reps, n))
        y = mean_y[None, :, :] + eps
        y_next = np.einsum("ik,ik->i", panel.x_next, betas)[None, :] + eps_next

        xty = np.einsum("itk,rit->rik", panel.x, y)
        beta_i = np.linalg.solve(grams[None, :, :, :], xty[..., None])[..., 0]
        beta_pool = np.linalg.solve(s_mat[None, :, :], xty.sum(axis=1)[..., None])[..., 0]
        se_ind = (np.einsum("ik,rik->ri", panel.x_next, beta_i) - y_next) ** 2
        se_pool = (np.einsum("rk,ik->ri", beta_pool, panel.x_next) - y_next) ** 2

        worst = 0.0
        for i in range(n):
            for closed, draws in (
                (individual_error(panel, truth, i), se_ind[:, i]),
                (pooled_error(panel, truth, i), se_pool[:, i]),
            ):
                gap = abs(closed - draws.mean()) / (draws.std() / math.sqrt(reps))
                worst = max(worst, gap)
        elapsed = time.perf_counter() - start
        report(
            1,
            worst < 3.0 and elapsed < 30.0,
            f"worst |closed-form - MC| = {worst:.2f} MC SEs (< 3), {elapsed:.1f}s (< 30s)",
        )


class TestCriterion02:
    def test_decomposition_identity(self):
        start = time.perf_counter()
        worst = 0.0
        for seed in range(100):
            rng = np.random.default_rng(1000 + seed)
            n, t_len, k = 4, 11, 3
            panel = Panel(
                x=rng.normal(1.0, 1.0, (n, t_len, k)),
                y=np.zeros((n, t_len)),
                x_next=rng.normal(1.0, 1.0, (n, k)),
            )
            truth = TrueModel(betas=rng.normal(size=(n, k)))
            dec = decompose_errors(panel, truth)
            lhs = dec.e_ind_per_i.mean() - dec.e_pool_per_i.mean()
            rhs = dec.e1 - dec.e2 - dec.e3
            worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
        elapsed = time.perf_counter() - start
        report(
            2,
            worst < 1e-10 and elapsed < 5.0,
            f"worst relative identity gap {worst:.2e} (< 1e-10), {elapsed:.1f}s (< 5s)",
        )


class TestCriterion03:
    def test_infeasible_coverage(self):
        cell = run_cell("T2", 100, 40)
        ok = abs(cell.cov_infeasible - 0.9568) <= 0.02
        report(
            "3 (coverage)",
            ok,
            f"infeasible coverage {cell.cov_infeasible:.4f} vs reference 0.9568 +/- 0.02",
        )

    def test_infeasible_length(self):
        # The reference mean length is not reproducible: the empirical
        # variance of the scaled statistic matches the tau^2 computed here
        # (verified directly against 5000-replication sample variance), and
        # the reference lengths do not satisfy the 1/sqrt(N) width scaling
        # that the interval construction mandates.  Documented in the
        # analysis notes; this check is intentionally left honest-red.
        cell = run_cell("T2", 100, 40)
        ok = abs(cell.len_infeasible - 0.9668) <= 0.05 * 0.9668
        report(
            "3 (length)",
            ok,
            f"infeasible mean length {cell.len_infeasible:.4f} vs reference 0.9668 +/- 5%",
        )


class TestCriterion04:
    def test_feasible_coverage(self):
        cell = run_cell("T2", 100, 40)
        ok = abs(cell.cov_feasible - 0.9596) <= 0.02
        report(
            "4 (coverage)",
            ok,
            f"feasible coverage {cell.cov_feasible:.4f} vs reference 0.9596 +/- 0.02",
        )

    def test_feasible_length(self):
        # Same situation as criterion 3 (length): the reference value fails
        # the mandatory 1/sqrt(N) scaling and the coverage at the measured
        # length is correct, so the measured length is the consistent one.
        cell = run_cell("T2", 100, 40)
        ok = abs(cell.len_feasible - 0.9772) <= 0.05 * 0.9772
        report(
            "4 (length)",
            ok,
            f"feasible mean length {cell.len_feasible:.4f} vs reference 0.9772 +/- 5%",
        )


class TestCriterion05:
    def test_ar1_homogeneous_coverage(self):
        cell = run_cell("T3", 500, 30)
        ok = abs(cell.cov_feasible - 0.9594) <= 0.02
        report(
            "5 (homogeneous)",
            ok,
            f"feasible coverage {cell.cov_feasible:.4f} vs reference 0.9594 +/- 0.02",
        )

    def test_ar1_heterogeneous_coverage(self):
        cell = run_cell("T4", 500, 30)
        ok = abs(cell.cov_feasible - 0.9392) <= 0.02
        report(
            "5 (heterogeneous)",
            ok,
            f"feasible coverage {cell.cov_feasible:.4f} vs reference 0.9392 +/- 0.02",
        )


class TestCriterion06:
    def test_fixed_effects_coverage(self):
        cell = run_cell("T6", 100, 30)
        ok = abs(cell.cov_feasible - 0.9556) <= 0.02
        report(
            6,
            ok,
            f"demeaned feasible coverage {cell.cov_feasible:.4f} vs reference 0.9556 +/- 0.02",
        )


class TestCriterion07:
    def test_parametric_repair_coverage(self):
        cell = run_cell("A13", 500, 30)
        ok = abs(cell.cov_feasible - 0.9758) <= 0.025
        report(
            "7 (parametric)",
            ok,
            f"feasible coverage {cell.cov_feasible:.4f} vs reference 0.9758 +/- 0.025",
        )

    def test_nonparametric_banded_coverage(self):
        # Not reproducible with the stated construction: at T=30 under
        # AR(1)(0.5) the small-sample bias of the banded residual-variance
        # plug-in (truncation plus residual attenuation) exceeds the interval
        # half-width at N=500, so coverage collapses for any bandwidth
        # convention.  The ratio bias/half-width is scale invariant, ruling
        # out normalization differences.  Documented in the analysis notes;
        # intentionally honest-red.
        cell = run_cell("A11", 500, 30)
        ok = abs(cell.cov_feasible - 0.9502) <= 0.025
        report(
            "7 (banded)",
            ok,
            f"feasible coverage {cell.cov_feasible:.4f} vs reference 0.9502 +/- 0.025",
        )


class TestCriterion08:
    def test_conservative_under_homogeneity(self):
        # 400 replications per cell keep the full 16-cell grid tractable on
        # one core; the threshold scales with the per-cell MC standard error.
        cells = build_table_cells("T1", reps=400, seed=0)
        summary = run_study(cells, threads=1)
        failures = [
            f"(N={c.n},T={c.t_len}) {c.cov_feasible:.4f} < {0.95 - 2 * c.mc_se:.4f}"
            for c in summary.cells
            if c.cov_feasible < 0.95 - 2.0 * c.mc_se
        ]
        lo = min(c.cov_feasible for c in summary.cells)
        report(
            8,
            not failures,
            f"16/16 cells >= 0.95 - 2 MC-SE (min coverage {lo:.4f})"
            if not failures
            else "; ".join(failures),
        )


class TestCriterion09:
    def test_standardized_statistic_is_normal(self):
        n, t_len, reps = 200, 100, 2000
        cfg = ScenarioConfig(
            n=n, t_len=t_len, reps=1, slope_design=HalfSplit(), error_design=IIDNormal()
        )
        spec = SigmaSpec(variant=Banded(b=1))
        zs = np.empty(reps)
        for rep in range(reps):
            panel, truth = simulate_panel(cfg, replication_stream(101, 0, rep))
            dec = decompose_errors(panel, truth)
            tau = oracle_tau(panel, truth)
            slopes = fit_individual_ols(panel)
            res = residuals(panel, slopes)
            e1, _ = e1_hat(panel, res, spec)
            point = e_hat(panel, slopes) - 2.0 * e1
            zs[rep] = (point - dec.diff) * math.sqrt(n) * t_len / math.sqrt(tau)
        ks = stats.kstest(zs, "norm").statistic
        report(9, ks < 0.05, f"KS distance to N(0,1) = {ks:.4f} (< 0.05), {reps} reps")


class TestCriterion10:
    def test_e1_decays_at_rate_one_over_t(self):
        t_values = [50, 100, 200, 400]
        means = []
        for t_len in t_values:
            cfg = ScenarioConfig(
                n=100, t_len=t_len, reps=1, slope_design=Homogeneous(), error_design=IIDNormal()
            )
            vals = [
                decompose_errors(*simulate_panel(cfg, replication_stream(55, 0, rep))).e1
                for rep in range(60)
            ]
            means.append(np.mean(vals))
        slope = np.polyfit(np.log(t_values), np.log(means), 1)[0]
        report(
            "10 (E1 rate)",
            abs(slope + 1.0) <= 0.15,
            f"log-log slope of E1 vs T = {slope:.3f} (target -1 +/- 0.15)",
        )

    def test_e_hat_concentration_rate(self):
        # Moderate heterogeneity: slope gaps of order 1/sqrt(T), so the
        # scaled deviation stays on one scale across the doubling sequence.
        scaled = []
        for n, t_len in [(50, 25), (100, 50), (200, 100)]:
            gap = 0.5 / math.sqrt(t_len)
            cfg = ScenarioConfig(
                n=n,
                t_len=t_len,
                reps=1,
                slope_design=HalfSplit(1.0 - gap, 1.0 + gap),
                error_design=IIDNormal(),
            )
            devs = []
            for rep in range(150):
                panel, truth = simulate_panel(cfg, replication_stream(56, 0, rep))
                dec = decompose_errors(panel, truth)
                slopes = fit_individual_ols(panel)
                devs.append(
                    abs(e_hat(panel, slopes) - (dec.e1 + dec.e2)) * t_len * math.sqrt(n)
                )
            scaled.append(float(np.median(devs)))
        ratio = max(scaled) / min(scaled)
        report(
            "10 (E-hat rate)",
            ratio < 2.0,
            f"scaled medians {['%.1f' % s for s in scaled]} across doubling, "
            f"max/min = {ratio:.2f} (< 2)",
        )

    def test_e1_hat_error_shrinks_with_automatic_bandwidth(self):
        spec = SigmaSpec(variant=Banded(b=None))
        errs = []
        t_values = [25, 50, 100, 200]
        for t_len in t_values:
            cfg = ScenarioConfig(
                n=50, t_len=t_len, reps=1, slope_design=Homogeneous(), error_design=AR1Errors(0.5)
            )
            vals = []
            for rep in range(60):
                panel, truth = simulate_panel(cfg, replication_stream(57, 0, rep))
                dec = decompose_errors(panel, truth)
                slopes = fit_individual_ols(panel)
                res = residuals(panel, slopes)
                e1, _ = e1_hat(panel, res, spec)
                vals.append(abs(e1 - dec.e1))
            errs.append(float(np.mean(vals)))
        monotone = all(a > b for a, b in zip(errs, errs[1:]))
        super_t = all(e * t < errs[0] * t_values[0] for e, t in zip(errs[1:], t_values[1:]))
        bands = [default_bandwidth(t) for t in t_values]
        report(
            "10 (E1-hat bound)",
            monotone and super_t,
            f"mean |E1-hat - E1| at T={t_values}, b={bands}: "
            f"{['%.4f' % e for e in errs]} (strictly shrinking, faster than 1/T)",
        )


class TestCriterion11:
    def test_unit_example_suites_pass(self):
        modules = sorted(
            p.name
            for p in Path(__file__).parent.glob("test_*.py")
            if p.name != "test_acceptance.py"
        )
        proc = subprocess.run(
            [sys.executable, "-m", "pytest", "-q", *modules],
            cwd=Path(__file__).parent,
            capture_output=True,
            text=True,
        )
        tail = proc.stdout.strip().split("\n")[-1] if proc.stdout else ""
        report(
            11,
            proc.returncode == 0,
            f"unit example suites ({len(modules)} modules): {tail}",
        )
