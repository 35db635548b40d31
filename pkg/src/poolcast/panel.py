"""Panel container and the within (fixed-effects) transformation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import AlreadyDemeaned


@dataclass(frozen=True)
class Panel:
    """A balanced panel with user-chosen prediction regressors.

    Attributes
    ----------
    x : ndarray, shape (n, t_len, k)
        Regressors, individual-major.
    y : ndarray, shape (n, t_len)
        Responses.
    x_next : ndarray, shape (n, k)
        Regressors at which one-step forecasts are compared.
    demeaned : bool
        Whether the within transformation has been applied.
    """

    x: np.ndarray
    y: np.ndarray
    x_next: np.ndarray
    demeaned: bool = False

    def __post_init__(self):
        x = np.ascontiguousarray(np.asarray(self.x, dtype=float))
        y = np.ascontiguousarray(np.asarray(self.y, dtype=float))
        x_next = np.ascontiguousarray(np.asarray(self.x_next, dtype=float))
        if x.ndim != 3:
            raise ValueError("x must have shape (n, t_len, k)")
        n, t_len, k = x.shape
        if y.shape != (n, t_len):
            raise ValueError(f"y has shape {y.shape}, expected {(n, t_len)}")
        if x_next.shape != (n, k):
            raise ValueError(f"x_next has shape {x_next.shape}, expected {(n, k)}")
        if t_len <= k:
            raise ValueError(f"need t_len > k for individual OLS (got T={t_len}, K={k})")
        for name, arr in (("x", x), ("y", y), ("x_next", x_next)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite entries in {name}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x_next", x_next)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def t_len(self) -> int:
        return self.x.shape[1]

    @property
    def k(self) -> int:
        return self.x.shape[2]


def within_demean(panel: Panel) -> Panel:
    """Subtract individual time means from x and y; shift x_next accordingly.

    Eliminates additive individual fixed effects. Raises
    :class:`AlreadyDemeaned` when applied twice.
    """
    if panel.demeaned:
        raise AlreadyDemeaned("panel is already demeaned")
    x_bar = panel.x.mean(axis=1)  # (n, k)
    y_bar = panel.y.mean(axis=1)  # (n,)
    return Panel(
        x=panel.x - x_bar[:, None, :],
        y=panel.y - y_bar[:, None],
        x_next=panel.x_next - x_bar,
        demeaned=True,
    )
