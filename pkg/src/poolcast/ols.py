"""Individual and pooled OLS slope estimators and their residuals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import SingularGram
from .panel import Panel

RCOND_MIN = 1e-12


@dataclass(frozen=True)
class SlopeEstimates:
    """OLS slopes: one row per individual plus the pooled vector."""

    individual: np.ndarray  # (n, k)
    pooled: np.ndarray  # (k,)


@dataclass(frozen=True)
class ResidualSet:
    """Per-individual OLS residuals y_i - X_i beta_i, shape (n, t_len)."""

    residuals: np.ndarray


def gram_matrices(panel: Panel) -> np.ndarray:
    """Stacked Gram matrices X_i'X_i, shape (n, k, k)."""
    return np.einsum("itj,itl->ijl", panel.x, panel.x)


def _check_rcond(grams: np.ndarray, pooled: bool = False) -> None:
    # reciprocal condition number via extreme singular values
    sv = np.linalg.svd(grams, compute_uv=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        rcond = sv[..., -1] / sv[..., 0]
    if pooled:
        if not rcond > RCOND_MIN:
            raise SingularGram(index=None, rcond=float(rcond))
    else:
        bad = np.flatnonzero(~(rcond > RCOND_MIN))
        if bad.size:
            i = int(bad[0])
            raise SingularGram(index=i, rcond=float(rcond[i]))


def fit_individual_ols(panel: Panel) -> SlopeEstimates:
    """Fit beta_i = (X_i'X_i)^{-1} X_i'y_i for every individual.

    The pooled component is filled in as well so the result is usable on
    its own; see :func:`fit_pooled_ols` for the pooled-only entry point.
    """
    grams = gram_matrices(panel)
    _check_rcond(grams)
    xty = np.einsum("itj,it->ij", panel.x, panel.y)
    individual = np.linalg.solve(grams, xty[..., None])[..., 0]
    pooled_gram = grams.sum(axis=0)
    _check_rcond(pooled_gram, pooled=True)
    pooled = np.linalg.solve(pooled_gram, xty.sum(axis=0))
    return SlopeEstimates(individual=individual, pooled=pooled)


def fit_pooled_ols(panel: Panel) -> SlopeEstimates:
    """Fit the pooled slope on all individuals' stacked data."""
    return fit_individual_ols(panel)


def residuals(panel: Panel, slopes: SlopeEstimates) -> ResidualSet:
    """Residuals r_{i,t} = y_{i,t} - x_{i,t}'beta_i of the individual fits."""
    fitted = np.einsum("itj,ij->it", panel.x, slopes.individual)
    return ResidualSet(residuals=panel.y - fitted)
