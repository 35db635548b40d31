"""Estimators of the T x T error covariance from OLS residuals.

Variants: nonparametric banded autocovariance, parametric AR(1) with
bias-corrected persistence, heteroskedasticity-scaled wrapping of an
inner estimator, HAC with Bartlett weights, and the known-truth matrix.
A fixed-effects adjustment (conjugation by the centering matrix M_T) can
be layered on any of them.

Note on the banding convention: diagonals are kept for |s - t| < b
(strict inequality), so b = 1 yields a diagonal matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .covstruct import CrossCov, IdentityCross, IdentityTime, TimeCov, center_both
from .exceptions import LagTooLarge, ZeroScale

PHI_CLAMP = 0.999


@dataclass(frozen=True)
class SigmaEstimate:
    """A T x T covariance estimate for one (i, k) pair."""

    matrix: np.ndarray
    band: int
    psd_flag: bool = False


# ---------------------------------------------------------------------
# strategy values
# ---------------------------------------------------------------------
@dataclass(frozen=True)
class Banded:
    """Banded residual autocovariance matrix; None means b = T^{2/7}."""

    b: Optional[int] = None


@dataclass(frozen=True)
class AR1Parametric:
    """Toeplitz sigma^2 * phi_bc^{|s-t|} with bias-corrected phi."""


@dataclass(frozen=True)
class HeteroScaled:
    """Standardize residuals by omega(x_t), apply ``inner``, conjugate back."""

    scale_fn: Callable[[np.ndarray], float]
    inner: "SigmaVariant"


@dataclass(frozen=True)
class HAC:
    """Bartlett-weighted residual outer product; None means b = T^{2/7}.

    No consistency theory backs this variant here; treat it as
    experimental for strongly dependent errors.
    """

    b: Optional[int] = None


@dataclass(frozen=True)
class TrueSigma:
    """Known error covariance: (Sigma_N)_{ii} * Sigma_T per individual."""

    sigma_t: TimeCov
    sigma_n: CrossCov = field(default_factory=IdentityCross)


SigmaVariant = Banded | AR1Parametric | HeteroScaled | HAC | TrueSigma


@dataclass(frozen=True)
class SigmaSpec:
    """Covariance estimation strategy plus the fixed-effects adjustment."""

    variant: SigmaVariant = field(default_factory=Banded)
    demean_adjust: bool = False


# ---------------------------------------------------------------------
# scalar operations
# ---------------------------------------------------------------------
def abs_first_component(row: np.ndarray) -> float:
    """Heteroskedasticity scale omega(x) = |x_1|."""
    return abs(float(row[0]))


def named_spec(name: str, bandwidth: Optional[int] = None) -> SigmaSpec:
    """Map a CLI/config variant name to a SigmaSpec.

    ``true`` is the known-covariance benchmark assuming unit-variance
    independent errors (identity Sigma_T and Sigma_N).
    """
    if name == "banded":
        return SigmaSpec(variant=Banded(b=bandwidth))
    if name == "ar1":
        return SigmaSpec(variant=AR1Parametric())
    if name == "hetero":
        return SigmaSpec(
            variant=HeteroScaled(scale_fn=abs_first_component, inner=Banded(b=bandwidth))
        )
    if name == "hac":
        return SigmaSpec(variant=HAC(b=bandwidth))
    if name == "true":
        return SigmaSpec(variant=TrueSigma(sigma_t=IdentityTime()))
    raise ValueError(f"unknown sigma variant name {name!r}")


def default_bandwidth(t_len: int) -> int:
    """Bandwidth b = T^{2/7}, rounded half-up, at least 1.

    The exponent value is first rounded to two decimals so that
    near-half cases resolve upward (e.g. T=80 gives 3.4977 -> 3.50 -> 4).
    """
    if t_len < 2:
        raise ValueError("need t_len >= 2")
    raw = t_len ** (2.0 / 7.0)
    two_dp = math.floor(raw * 100.0 + 0.5) / 100.0
    return max(1, math.floor(two_dp + 0.5))


def autocov_hat(r_i: np.ndarray, r_k: np.ndarray, h: int, k_dim: int) -> float:
    """Lag-h residual cross-autocovariance with divisor T - h - K."""
    r_i = np.asarray(r_i, dtype=float)
    r_k = np.asarray(r_k, dtype=float)
    t_len = r_i.shape[0]
    if r_k.shape != r_i.shape:
        raise ValueError("residual series have different lengths")
    div = t_len - h - k_dim
    if h < 0 or div <= 0:
        raise LagTooLarge(h, t_len, k_dim)
    return float(r_i[: t_len - h] @ r_k[h:]) / div


# ---------------------------------------------------------------------
# per-pair estimators
# ---------------------------------------------------------------------
def banded_sigma(r_i: np.ndarray, r_k: np.ndarray, b: int, k_dim: int) -> SigmaEstimate:
    """Banded Toeplitz matrix of cross-autocovariances, lags |s-t| < b."""
    r_i = np.asarray(r_i, dtype=float)
    t_len = r_i.shape[0]
    if not 1 <= b <= t_len - k_dim:
        raise LagTooLarge(b - 1, t_len, k_dim)
    xi = np.zeros(t_len)
    for h in range(b):
        xi[h] = autocov_hat(r_i, r_k, h, k_dim)
    lags = np.abs(np.arange(t_len)[:, None] - np.arange(t_len)[None, :])
    return SigmaEstimate(matrix=xi[lags], band=b)


def ar1_fit(r_i: np.ndarray, k_dim: int) -> tuple[float, float]:
    """Bias-corrected AR(1) coefficient and residual variance.

    phi_hat regresses r_t on r_{t-1} with an intercept (equivalently, on
    the mean-subtracted series); the correction phi + (1 + 3 phi)/T is
    calibrated for exactly that estimator and offsets its small-sample
    bias. The result is clamped to (-0.999, 0.999) to keep the Toeplitz
    tail summable.
    """
    r_i = np.asarray(r_i, dtype=float)
    t_len = r_i.shape[0]
    if t_len < 3:
        raise ValueError("need T >= 3 for the AR(1) fit")
    centered = r_i - r_i.mean()
    denom = float(centered[:-1] @ centered[:-1])
    phi = float(centered[1:] @ centered[:-1]) / denom if denom > 0 else 0.0
    phi_bc = phi + (1.0 + 3.0 * phi) / t_len
    phi_bc = float(np.clip(phi_bc, -PHI_CLAMP, PHI_CLAMP))
    sigma2 = float(r_i @ r_i) / (t_len - k_dim)
    return phi_bc, sigma2


def ar1_sigma(r_i: np.ndarray, k_dim: int) -> SigmaEstimate:
    """Parametric AR(1) covariance sigma^2 * phi_bc^{|s-t|}."""
    r_i = np.asarray(r_i, dtype=float)
    t_len = r_i.shape[0]
    phi_bc, sigma2 = ar1_fit(r_i, k_dim)
    lags = np.abs(np.arange(t_len)[:, None] - np.arange(t_len)[None, :])
    return SigmaEstimate(matrix=sigma2 * phi_bc**lags, band=t_len, psd_flag=True)


def hac_sigma(r_i: np.ndarray, b: int) -> SigmaEstimate:
    """Bartlett-weighted outer product of residuals.

    With b >= T no weight is truncated and the result is positive
    semidefinite (Schur product of the triangular-kernel matrix and the
    rank-one outer product); smaller b zeroes the |s-t| >= b weights
    before the kernel reaches zero, which can break semidefiniteness.
    """
    r_i = np.asarray(r_i, dtype=float)
    if b < 1:
        raise ValueError("need b >= 1")
    t_len = r_i.shape[0]
    w = bartlett_weights(t_len, b)
    return SigmaEstimate(matrix=w * np.outer(r_i, r_i), band=b, psd_flag=bool(b >= t_len))


def bartlett_weights(t_len: int, b: int) -> np.ndarray:
    """w(s,t) = (1 - |s-t|/(b+1)) * 1{|s-t| < b}."""
    lags = np.abs(np.arange(t_len)[:, None] - np.arange(t_len)[None, :])
    return np.where(lags < b, 1.0 - lags / (b + 1.0), 0.0)


def hetero_sigma(
    resid_i: np.ndarray,
    x_i: np.ndarray,
    scale_fn: Callable[[np.ndarray], float],
    inner: SigmaVariant,
    k_dim: int,
) -> SigmaEstimate:
    """Scale residuals to homoskedasticity, estimate, and conjugate back.

    The output is Omega * inner_estimate * Omega with
    Omega = diag(omega(x_1), ..., omega(x_T)).
    """
    resid_i = np.asarray(resid_i, dtype=float)
    x_i = np.asarray(x_i, dtype=float)
    omega = np.array([float(scale_fn(x_i[t])) for t in range(x_i.shape[0])])
    if np.any(omega <= 1e-12):
        raise ZeroScale("scale function returned a value <= 1e-12")
    std = resid_i / omega
    inner_est = estimate_sigma(std, x_i, SigmaSpec(variant=inner), k_dim)
    return SigmaEstimate(
        matrix=omega[:, None] * inner_est.matrix * omega[None, :],
        band=inner_est.band,
        psd_flag=inner_est.psd_flag,
    )


def demean_adjust(est: SigmaEstimate) -> SigmaEstimate:
    """Conjugate by M_T = I - 11'/T; rows and columns then sum to zero."""
    return SigmaEstimate(matrix=center_both(est.matrix), band=est.band, psd_flag=est.psd_flag)


def estimate_sigma(
    resid_i: np.ndarray,
    x_i: np.ndarray,
    spec: SigmaSpec,
    k_dim: int,
    individual: int = 0,
) -> SigmaEstimate:
    """Apply ``spec`` to a single individual's residuals."""
    t_len = np.asarray(resid_i).shape[0]
    v = spec.variant
    if isinstance(v, Banded):
        b = v.b if v.b is not None else default_bandwidth(t_len)
        est = banded_sigma(resid_i, resid_i, b, k_dim)
    elif isinstance(v, AR1Parametric):
        est = ar1_sigma(resid_i, k_dim)
    elif isinstance(v, HAC):
        b = v.b if v.b is not None else default_bandwidth(t_len)
        est = hac_sigma(resid_i, b)
    elif isinstance(v, HeteroScaled):
        est = hetero_sigma(resid_i, x_i, v.scale_fn, v.inner, k_dim)
    elif isinstance(v, TrueSigma):
        scale = v.sigma_n.entry(individual, individual)
        est = SigmaEstimate(matrix=scale * v.sigma_t.materialize(t_len), band=t_len, psd_flag=True)
    else:  # pragma: no cover
        raise TypeError(f"unknown sigma variant: {v!r}")
    if spec.demean_adjust:
        est = demean_adjust(est)
    return est


# ---------------------------------------------------------------------
# batched builders (hot path for the simulation harness)
# ---------------------------------------------------------------------
def sigma_matrices(resids: np.ndarray, x: np.ndarray, spec: SigmaSpec, k_dim: int) -> np.ndarray:
    """Per-individual covariance estimates as one (n, T, T) array.

    Vectorized equivalent of calling :func:`estimate_sigma` for every i;
    both paths are kept consistent by tests.
    """
    resids = np.asarray(resids, dtype=float)
    n, t_len = resids.shape
    v = spec.variant
    if isinstance(v, Banded):
        b = v.b if v.b is not None else default_bandwidth(t_len)
        if not 1 <= b <= t_len - k_dim:
            raise LagTooLarge(b - 1, t_len, k_dim)
        xi = np.zeros((n, t_len))
        for h in range(b):
            xi[:, h] = (resids[:, : t_len - h] * resids[:, h:]).sum(axis=1) / (t_len - h - k_dim)
        lags = np.abs(np.arange(t_len)[:, None] - np.arange(t_len)[None, :])
        out = xi[:, lags]
    elif isinstance(v, AR1Parametric):
        centered = resids - resids.mean(axis=1, keepdims=True)
        denom = (centered[:, :-1] ** 2).sum(axis=1)
        num = (centered[:, 1:] * centered[:, :-1]).sum(axis=1)
        phi = np.where(denom > 0, num / np.where(denom > 0, denom, 1.0), 0.0)
        phi_bc = np.clip(phi + (1.0 + 3.0 * phi) / t_len, -PHI_CLAMP, PHI_CLAMP)
        sigma2 = (resids**2).sum(axis=1) / (t_len - k_dim)
        lags = np.abs(np.arange(t_len)[:, None] - np.arange(t_len)[None, :])
        out = sigma2[:, None, None] * phi_bc[:, None, None] ** lags[None, :, :]
    elif isinstance(v, HAC):
        b = v.b if v.b is not None else default_bandwidth(t_len)
        w = bartlett_weights(t_len, b)
        out = w[None, :, :] * resids[:, :, None] * resids[:, None, :]
    elif isinstance(v, HeteroScaled):
        omega = np.apply_along_axis(v.scale_fn, 2, x)
        if np.any(omega <= 1e-12):
            raise ZeroScale("scale function returned a value <= 1e-12")
        inner = sigma_matrices(resids / omega, x, SigmaSpec(variant=v.inner), k_dim)
        out = omega[:, :, None] * inner * omega[:, None, :]
    elif isinstance(v, TrueSigma):
        base = v.sigma_t.materialize(t_len)
        diag = v.sigma_n.diagonal(n) if v.sigma_n.is_diagonal else np.array(
            [v.sigma_n.entry(i, i) for i in range(n)]
        )
        out = diag[:, None, None] * base[None, :, :]
    else:  # pragma: no cover
        raise TypeError(f"unknown sigma variant: {v!r}")
    if spec.demean_adjust:
        out = (
            out
            - out.mean(axis=1, keepdims=True)
            - out.mean(axis=2, keepdims=True)
            + out.mean(axis=(1, 2), keepdims=True)
        )
    return out


def cross_sigma(
    resids: np.ndarray, i: int, k: int, spec: SigmaSpec, k_dim: int
) -> SigmaEstimate:
    """Cross-pair estimate Sigma^{(i,k)}(b); only the banded variant defines one."""
    v = spec.variant
    if isinstance(v, TrueSigma):
        t_len = resids.shape[1]
        est = SigmaEstimate(
            matrix=v.sigma_n.entry(i, k) * v.sigma_t.materialize(t_len),
            band=t_len,
            psd_flag=True,
        )
    elif isinstance(v, Banded):
        t_len = resids.shape[1]
        b = v.b if v.b is not None else default_bandwidth(t_len)
        est = banded_sigma(resids[i], resids[k], b, k_dim)
    else:
        raise ValueError(
            f"cross-pair covariance is undefined for {type(v).__name__}; use b_prime = 1"
        )
    if spec.demean_adjust:
        est = demean_adjust(est)
    return est
