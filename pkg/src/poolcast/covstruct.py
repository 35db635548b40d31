"""Structured representations of the error covariance factors.

The separable error covariance is Sigma_N (x) Sigma_T. Simulations and
oracle formulas only ever need a few structured forms, so dense matrices
are materialized lazily and identity / diagonal cases are pruned in the
pair sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


# ---------------------------------------------------------------------
# temporal factor Sigma_T
# ---------------------------------------------------------------------
class TimeCov:
    """Base class for the T x T temporal covariance factor."""

    def materialize(self, t_len: int) -> np.ndarray:
        raise NotImplementedError

    def top_left(self, t_len: int) -> float:
        """Entry (1, 1), the one-step-ahead error variance factor."""
        return float(self.materialize(t_len)[0, 0])


@dataclass(frozen=True)
class IdentityTime(TimeCov):
    scale: float = 1.0

    def materialize(self, t_len: int) -> np.ndarray:
        return self.scale * np.eye(t_len)

    def top_left(self, t_len: int) -> float:
        return self.scale


@dataclass(frozen=True)
class AR1Time(TimeCov):
    """Stationary AR(1) covariance: scale / (1 - phi^2) * phi^{|s-t|}."""

    phi: float
    scale: float = 1.0

    def materialize(self, t_len: int) -> np.ndarray:
        lags = np.abs(np.arange(t_len)[:, None] - np.arange(t_len)[None, :])
        return self.scale / (1.0 - self.phi**2) * self.phi**lags

    def top_left(self, t_len: int) -> float:
        return self.scale / (1.0 - self.phi**2)


@dataclass(frozen=True)
class DenseTime(TimeCov):
    matrix: np.ndarray

    def materialize(self, t_len: int) -> np.ndarray:
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (t_len, t_len):
            raise ValueError(f"dense Sigma_T has shape {m.shape}, expected {(t_len, t_len)}")
        return m


@dataclass(frozen=True)
class DemeanedTime(TimeCov):
    """M_T Sigma M_T: covariance of errors after the within transformation."""

    inner: TimeCov

    def materialize(self, t_len: int) -> np.ndarray:
        return center_both(self.inner.materialize(t_len))

    def top_left(self, t_len: int) -> float:
        return float(self.materialize(t_len)[0, 0])


def center_both(a: np.ndarray) -> np.ndarray:
    """Conjugate by the centering matrix: M A M with M = I - 11'/T."""
    return a - a.mean(axis=0, keepdims=True) - a.mean(axis=1, keepdims=True) + a.mean()


# ---------------------------------------------------------------------
# cross-sectional factor Sigma_N
# ---------------------------------------------------------------------
class CrossCov:
    """Base class for the N x N cross-sectional covariance factor."""

    is_diagonal = False

    def diagonal(self, n: int) -> np.ndarray:
        raise NotImplementedError

    def entry(self, i: int, k: int) -> float:
        raise NotImplementedError

    def materialize(self, n: int) -> np.ndarray:
        m = np.zeros((n, n))
        for i in range(n):
            for k in range(n):
                m[i, k] = self.entry(i, k)
        return m


@dataclass(frozen=True)
class IdentityCross(CrossCov):
    scale: float = 1.0
    is_diagonal = True

    def diagonal(self, n: int) -> np.ndarray:
        return np.full(n, self.scale)

    def entry(self, i: int, k: int) -> float:
        return self.scale if i == k else 0.0

    def materialize(self, n: int) -> np.ndarray:
        return self.scale * np.eye(n)


@dataclass(frozen=True)
class DiagonalCross(CrossCov):
    values: np.ndarray
    is_diagonal = True

    def diagonal(self, n: int) -> np.ndarray:
        v = np.asarray(self.values, dtype=float)
        if v.shape != (n,):
            raise ValueError(f"diagonal Sigma_N has shape {v.shape}, expected ({n},)")
        return v

    def entry(self, i: int, k: int) -> float:
        return float(self.values[i]) if i == k else 0.0

    def materialize(self, n: int) -> np.ndarray:
        return np.diag(self.diagonal(n))


@dataclass(frozen=True)
class DenseCross(CrossCov):
    matrix: np.ndarray

    def diagonal(self, n: int) -> np.ndarray:
        return np.diag(self.materialize(n)).copy()

    def entry(self, i: int, k: int) -> float:
        return float(self.matrix[i, k])

    def materialize(self, n: int) -> np.ndarray:
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (n, n):
            raise ValueError(f"dense Sigma_N has shape {m.shape}, expected {(n, n)}")
        return m
