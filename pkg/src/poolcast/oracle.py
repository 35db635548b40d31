"""Exact conditional prediction errors computed from known truth.

Given the true slopes and the separable error covariance, the
conditional mean squared forecast errors of the individual and pooled
estimators have closed forms; their difference decomposes as

    E_ind - E_pool = e1 - e2 - e3,

where e1 is the variance of the individual forecasts, e2 the squared
pooling bias and e3 the (much smaller) variance of the pooled forecasts.
This module also evaluates the oracle long-run variance used by the
infeasible benchmark interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._algebra import beta_bar, lambda_terms, projection_vectors
from .covstruct import CrossCov, IdentityCross, IdentityTime, TimeCov, center_both
from .exceptions import DegenerateVariance
from .ols import gram_matrices
from .panel import Panel

DEGENERATE_TOL = 1e-14

_IDENTITY_T = IdentityTime()


@dataclass(frozen=True)
class TrueModel:
    """Ground truth: slopes and the separable error covariance.

    ``omega``/``omega_next`` hold per-observation error scales for
    heteroskedastic designs (errors omega * u with u stationary);
    ``demeaned`` records that errors have been hit by the centering
    matrix M_T, as happens after the within transformation.
    """

    betas: np.ndarray  # (n, k)
    sigma_n: CrossCov = field(default_factory=IdentityCross)
    sigma_t: TimeCov = field(default_factory=lambda: _IDENTITY_T)
    omega: Optional[np.ndarray] = None  # (n, t_len)
    omega_next: Optional[np.ndarray] = None  # (n,)
    demeaned: bool = False

    def temporal_matrices(self, t_len: int) -> np.ndarray:
        """Effective per-individual temporal covariance C_i, shape (n, T, T).

        C_i = (M) Omega_i Sigma_T Omega_i (M), without the Sigma_N factor.
        """
        n = self.betas.shape[0]
        base = self.sigma_t.materialize(t_len)
        if self.omega is None:
            c = np.broadcast_to(base, (n, t_len, t_len))
            if not self.demeaned:
                return c
            return np.broadcast_to(center_both(base), (n, t_len, t_len))
        c = self.omega[:, :, None] * base[None, :, :] * self.omega[:, None, :]
        if self.demeaned:
            c = (
                c
                - c.mean(axis=1, keepdims=True)
                - c.mean(axis=2, keepdims=True)
                + c.mean(axis=(1, 2), keepdims=True)
            )
        return c

    def pair_matrix(self, i: int, k: int, t_len: int) -> np.ndarray:
        """Temporal part of the (i, k) error cross-covariance (no Sigma_N)."""
        base = self.sigma_t.materialize(t_len)
        if self.omega is not None:
            base = self.omega[i][:, None] * base * self.omega[k][None, :]
        if self.demeaned:
            base = center_both(base)
        return base

    def next_variance(self, i: int, t_len: int) -> float:
        """Variance of the fresh error at T+1 for individual i."""
        v = self.sigma_n.entry(i, i) * self.sigma_t.top_left(t_len)
        if self.omega_next is not None:
            v *= float(self.omega_next[i]) ** 2
        return v


@dataclass(frozen=True)
class ErrorDecomposition:
    e_ind_per_i: np.ndarray
    e_pool_per_i: np.ndarray
    e1: float
    e2: float
    e3: float

    @property
    def diff(self) -> float:
        """E_pool - E_ind, the quantity the confidence interval targets."""
        return float(self.e_pool_per_i.mean() - self.e_ind_per_i.mean())


def _pooled_noise_matrix(panel: Panel, truth: TrueModel) -> np.ndarray:
    """G = sum_{j,k} (Sigma_N)_{jk} X_j' C_jk X_k, shape (k, k)."""
    x = panel.x
    n, t_len, _ = x.shape
    sn = truth.sigma_n
    if sn.is_diagonal:
        c = truth.temporal_matrices(t_len)
        d = sn.diagonal(n)
        return np.einsum("j,jsk,jst,jtl->kl", d, x, c, x, optimize=True)
    if truth.omega is None and not truth.demeaned:
        s = truth.sigma_t.materialize(t_len)
        m = sn.materialize(n)
        weighted = np.tensordot(m, x, axes=1)  # (n, t_len, k)
        return np.einsum("jsk,st,jtl->kl", x, s, weighted, optimize=True)
    # general fallback: explicit pair loop (small instances only)
    g = np.zeros((panel.k, panel.k))
    for j in range(n):
        for k_idx in range(n):
            w = sn.entry(j, k_idx)
            if w == 0.0:
                continue
            g += w * x[j].T @ truth.pair_matrix(j, k_idx, t_len) @ x[k_idx]
    return g


def decompose_errors(panel: Panel, truth: TrueModel) -> ErrorDecomposition:
    """Closed-form E_i^ind, E_i^pool and the e1/e2/e3 decomposition."""
    x, x_next = panel.x, panel.x_next
    n, t_len, _ = x.shape
    grams = gram_matrices(panel)
    s = grams.sum(axis=0)
    u = projection_vectors(x, grams, x_next)  # (n, t_len)
    c = truth.temporal_matrices(t_len)
    sn_diag = np.array([truth.sigma_n.entry(i, i) for i in range(n)])

    ind_var = sn_diag * np.einsum("is,ist,it->i", u, c, u, optimize=True)
    e1 = float(ind_var.mean())

    bbar = beta_bar(grams, truth.betas)
    bias = np.einsum("ik,ik->i", x_next, bbar - truth.betas)
    e2 = float((bias**2).mean())

    g = _pooled_noise_matrix(panel, truth)
    w = np.linalg.solve(s, x_next.T).T  # (n, k): S^{-1} x_{i,T+1}
    pool_var = np.einsum("ik,kl,il->i", w, g, w, optimize=True)
    e3 = float(pool_var.mean())

    const = np.array([truth.next_variance(i, t_len) for i in range(n)])
    return ErrorDecomposition(
        e_ind_per_i=ind_var + const,
        e_pool_per_i=bias**2 + pool_var + const,
        e1=e1,
        e2=e2,
        e3=e3,
    )


def individual_error(panel: Panel, truth: TrueModel, i: int) -> float:
    """Conditional MSFE of the individual estimator for individual i."""
    return float(decompose_errors(panel, truth).e_ind_per_i[i])


def pooled_error(panel: Panel, truth: TrueModel, i: int) -> float:
    """Conditional MSFE of the pooled estimator for individual i."""
    return float(decompose_errors(panel, truth).e_pool_per_i[i])


def oracle_tau(panel: Panel, truth: TrueModel) -> float:
    """Oracle long-run variance tau_N^2 of the forecast-gap estimator."""
    x, x_next = panel.x, panel.x_next
    n, t_len, _ = x.shape
    grams = gram_matrices(panel)
    bbar = beta_bar(grams, truth.betas)
    lam, lam_i = lambda_terms(x, x_next, grams, truth.betas, bbar)
    v = t_len * np.linalg.solve(grams, x_next[..., None])[..., 0]  # (n, k)
    sn = truth.sigma_n
    if sn.is_diagonal:
        c = truth.temporal_matrices(t_len)
        m = np.einsum("isk,ist,itl->ikl", x, c, x, optimize=True) / t_len
        quad = np.einsum("ik,ikl,il->i", v, m, v, optimize=True)
        lam_sum = lam[None, :] + lam_i
        lin = np.einsum("ik,ikl,il->i", lam_sum, m, lam_sum, optimize=True)
        d = sn.diagonal(n)
        total = float((2.0 * d**2 * quad**2 + 4.0 * d * lin).sum() / n)
    else:
        total = 0.0
        for i in range(n):
            for k_idx in range(n):
                w = sn.entry(i, k_idx)
                if w == 0.0:
                    continue
                m = x[i].T @ truth.pair_matrix(i, k_idx, t_len) @ x[k_idx] / t_len
                quad = v[i] @ m @ v[k_idx]
                lin = (lam + lam_i[i]) @ m @ (lam + lam_i[k_idx])
                total += 2.0 * w**2 * quad**2 + 4.0 * w * lin
        total /= n
    if total <= DEGENERATE_TOL:
        raise DegenerateVariance(f"oracle tau^2 = {total}")
    return total
