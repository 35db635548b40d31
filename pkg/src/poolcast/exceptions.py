"""Exception types raised across the package.

Every error carries enough context to produce a single machine-parsable
line of the form ``error: <Name> key=value ...`` on the CLI.
"""

from __future__ import annotations


class PoolcastError(Exception):
    """Base class for all package errors."""

    def code(self) -> str:
        """Short machine-readable error name."""
        return type(self).__name__


class SingularGram(PoolcastError):
    """A Gram matrix X'X is rank deficient beyond tolerance.

    ``index`` is the individual's index, or None for the pooled Gram.
    """

    def __init__(self, index=None, rcond=None):
        self.index = index
        self.rcond = rcond
        where = "pooled" if index is None else f"individual {index}"
        super().__init__(f"singular Gram matrix ({where}, rcond={rcond})")


class AlreadyDemeaned(PoolcastError):
    """The within transformation was applied twice."""


class LagTooLarge(PoolcastError):
    """Autocovariance lag leaves a non-positive divisor T - h - K."""

    def __init__(self, h, t_len, k_dim):
        self.h = h
        super().__init__(
            f"lag {h} too large: divisor T - h - K = {t_len - h - k_dim} <= 0"
        )


class ZeroScale(PoolcastError):
    """A heteroskedasticity scale function returned a non-positive value."""


class DegenerateVariance(PoolcastError):
    """The (estimated or oracle) long-run variance is numerically zero."""


class NonpositiveVariance(PoolcastError):
    """A confidence interval was requested with tau_sq <= 0."""


class OutOfRange(PoolcastError):
    """Probability argument outside the open unit interval."""


class UnbalancedPanel(PoolcastError):
    """An individual in a long-format CSV has missing or extra periods."""

    def __init__(self, individual_id):
        self.individual_id = individual_id
        super().__init__(f"unbalanced panel: individual {individual_id!r}")


class MissingPrediction(PoolcastError):
    """No prediction-regressor row for an individual."""

    def __init__(self, individual_id):
        self.individual_id = individual_id
        super().__init__(f"missing prediction regressors for {individual_id!r}")


class NonNumericCell(PoolcastError):
    """A CSV data cell could not be parsed as a number."""

    def __init__(self, row, col):
        self.row = row
        self.col = col
        super().__init__(f"non-numeric cell at row {row}, column {col}")


class UnknownTable(PoolcastError):
    """Requested study id is not in the scenario registry."""


class ParseError(PoolcastError):
    """Malformed configuration text."""


class ValidationError(PoolcastError):
    """A configuration value violates an invariant."""
