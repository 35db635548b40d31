"""Shared linear algebra pieces used by both the oracle and feasible paths.

All quadratic forms are evaluated with matrix-vector products; rank-one
outer products are never formed.
"""

from __future__ import annotations

import numpy as np


def beta_bar(grams: np.ndarray, betas: np.ndarray) -> np.ndarray:
    """Gram-weighted slope average (sum_j X_j'X_j)^{-1} sum_j X_j'X_j beta_j.

    For estimated slopes this equals the pooled OLS slope.
    """
    s = grams.sum(axis=0)
    return np.linalg.solve(s, np.einsum("jkl,jl->k", grams, betas))


def projection_vectors(x: np.ndarray, grams: np.ndarray, x_next: np.ndarray) -> np.ndarray:
    """u_i = X_i (X_i'X_i)^{-1} x_{i,T+1}, shape (n, t_len)."""
    a = np.linalg.solve(grams, x_next[..., None])[..., 0]
    return np.einsum("itk,ik->it", x, a)


def lambda_terms(
    x: np.ndarray,
    x_next: np.ndarray,
    grams: np.ndarray,
    betas: np.ndarray,
    bbar: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Long-run variance weight vectors.

    Returns (lam, lam_i) where lam has shape (k,) and lam_i shape (n, k).
    Uses the identity that the inner weighted slope-difference sum
    collapses to sqrt(T) * x_{i,T+1}'(beta_bar - beta_i).
    """
    n, t_len, _ = x.shape
    g = np.sqrt(t_len) * np.einsum("ik,ik->i", x_next, bbar - betas)  # (n,)
    s_scaled = grams.sum(axis=0) / (n * t_len)
    lam = np.linalg.solve(s_scaled, (x_next * g[:, None]).mean(axis=0))
    v = t_len * np.linalg.solve(grams, x_next[..., None])[..., 0]  # (X_i'X_i/T)^{-1} x_{i,T+1}
    lam_i = v * g[:, None]
    return lam, lam_i
