"""Command-line interface: simulate coverage studies, analyze CSV panels,
and reproduce the published study tables."""

from __future__ import annotations

import sys
from dataclasses import replace

import click

from .covariance import named_spec
from .exceptions import PoolcastError
from .inference import InferenceResult, run_inference
from .io import SIGMA_NAMES, build_cells, load_panel, parse_config
from .panel import within_demean
from .simulate import emit_table, run_study
from .tables import build_table_cells, table_ids


def _fail(exc: PoolcastError) -> None:
    click.echo(f"error: {exc.code()}: {exc}", err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Compare pooled and individual OLS forecasts in large panels."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--reps", type=int, default=None, help="Override replication count.")
@click.option("--threads", type=int, default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
def simulate(config_path, seed, reps, threads, out_path) -> None:
    """Run the coverage study described by a YAML config."""
    try:
        with open(config_path) as fh:
            cfg = parse_config(fh.read())
        cells = build_cells(cfg)
        if seed is not None or reps is not None:
            cells = [
                replace(
                    c,
                    seed=c.seed if seed is None else seed,
                    reps=c.reps if reps is None else reps,
                )
                for c in cells
            ]
        summary = run_study(cells, threads=threads if threads is not None else cfg.threads)
    except PoolcastError as exc:
        _fail(exc)
    text = emit_table(summary, fmt="csv")
    target = out_path or cfg.output_path
    if target:
        with open(target, "w") as fh:
            fh.write(text)
    click.echo(text, nl=False)


def _print_report(result: InferenceResult) -> None:
    click.echo(f"point estimate (E_pool - E_ind): {result.point:.6g}")
    click.echo(
        f"{100 * (1 - result.alpha):.0f}% confidence interval: "
        f"[{result.lo:.6g}, {result.hi:.6g}]"
    )
    click.echo(f"decision: {result.decision}")
    click.echo(f"covariance estimator: {result.variant_used}")
    click.echo(
        f"bandwidths: b={result.bandwidths[0] if result.bandwidths[0] is not None else 'auto'}"
        f" b'={result.bandwidths[1]:g}"
    )
    if result.degenerate_variance:
        click.echo("warning: variance estimate was floored (non-PSD banded input)")


@main.command()
@click.option("--panel", "panel_path", required=True, type=click.Path(exists=True))
@click.option("--predict", "predict_path", required=True, type=click.Path(exists=True))
@click.option("--sigma", type=click.Choice(SIGMA_NAMES), default="banded")
@click.option("--bandwidth", type=int, default=None)
@click.option("--alpha", type=float, default=0.05)
@click.option("--fixed-effects", is_flag=True)
@click.option("--strict-paper-ci", is_flag=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
def analyze(
    panel_path, predict_path, sigma, bandwidth, alpha, fixed_effects, strict_paper_ci, out_path
) -> None:
    """Compare pooled vs individual forecasts on a long-format CSV panel."""
    try:
        panel = load_panel(panel_path, predict_path)
        if fixed_effects:
            panel = within_demean(panel)
        result = run_inference(
            panel,
            spec=named_spec(sigma, bandwidth),
            alpha=alpha,
            strict_paper_ci=strict_paper_ci,
        )
    except PoolcastError as exc:
        _fail(exc)
    _print_report(result)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write("point,lo,hi,alpha,decision,variant,tau_sq,e_hat,e1_hat\n")
            fh.write(
                f"{result.point!r},{result.lo!r},{result.hi!r},{result.alpha!r},"
                f"{result.decision},{result.variant_used},{result.tau_sq!r},"
                f"{result.e_hat!r},{result.e1_hat!r}\n"
            )


@main.command()
@click.option("--id", "table_id", required=True, help=f"one of {', '.join(table_ids())}")
@click.option("--reps", type=int, default=5000)
@click.option("--seed", type=int, default=0)
@click.option("--threads", type=int, default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--fmt", type=click.Choice(["csv", "text"]), default="csv")
def table(table_id, reps, seed, threads, out_path, fmt) -> None:
    """Re-run one published simulation table (T1-T6, A7-A16)."""
    try:
        cells = build_table_cells(table_id, reps=reps, seed=seed)
        summary = run_study(cells, threads=threads)
    except PoolcastError as exc:
        _fail(exc)
    text = emit_table(summary, fmt=fmt)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    click.echo(text, nl=False)


if __name__ == "__main__":
    main()
