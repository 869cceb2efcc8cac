"""Forecast accuracy, token usage balance, and rank correlation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ConfigurationError, InputDataError, ZeroSeasonalError
from .validation import as_float_array, as_token_array, check_int_at_least


def seasonal_error(context, seasonality: int = 1) -> float:
    """Mean absolute difference between context points one season apart."""
    ctx = as_float_array(context, "context")
    m = check_int_at_least(seasonality, 1, "seasonality")
    if m >= ctx.size:
        raise InputDataError(
            f"seasonality must be smaller than the context length {ctx.size}")
    return float(np.mean(np.abs(ctx[m:] - ctx[:-m])))


def mase(actual, predicted, context, seasonality: int = 1) -> float:
    """Mean absolute scaled error of a forecast against a seasonal naive baseline.

    mean(|actual - predicted|) divided by the seasonal error of the
    context. Raises ZeroSeasonalError when the baseline error is zero,
    leaving the skip-or-abort decision to the caller. Invariant under a
    common rescaling of all three inputs.
    """
    y = as_float_array(actual, "actual")
    yhat = as_float_array(predicted, "predicted")
    if y.size != yhat.size:
        raise InputDataError(
            f"actual and predicted lengths differ: {y.size} vs {yhat.size}")
    denom = seasonal_error(context, seasonality)
    if denom == 0.0:
        raise ZeroSeasonalError("seasonal naive error of the context is zero")
    return float(np.mean(np.abs(y - yhat)) / denom)


@dataclass(frozen=True)
class UtilizationStats:
    """Histogram of token usage plus concentration summaries.

    ``cramers_v`` measures deviation from uniform usage over all B
    bins: 0 for exactly uniform counts and 1 when a single bin absorbs
    everything. ``balance`` is its complement 1 - V. ``normalized_entropy``
    is the Shannon entropy of the empirical distribution divided by
    log(B).
    """

    counts: tuple[int, ...]
    n: int
    cramers_v: float
    balance: float
    normalized_entropy: float

    def to_dict(self) -> dict:
        return {
            "counts": list(self.counts),
            "n": self.n,
            "cramers_v": self.cramers_v,
            "balance": self.balance,
            "normalized_entropy": self.normalized_entropy,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "UtilizationStats":
        return cls(counts=tuple(int(c) for c in obj["counts"]), n=int(obj["n"]),
                   cramers_v=float(obj["cramers_v"]), balance=float(obj["balance"]),
                   normalized_entropy=float(obj["normalized_entropy"]))


def utilization(tokens, n_bins: int) -> UtilizationStats:
    """Token usage statistics over a vocabulary of ``n_bins`` bins.

    The chi-square statistic is taken against the uniform expectation
    n / B over all B categories, zero counts included, and normalized
    by its maximum n * (B - 1).
    """
    n_bins = check_int_at_least(n_bins, 2, "n_bins")
    if hasattr(tokens, "tokens"):
        tokens = tokens.tokens
    arr = as_token_array(tokens)
    if arr.size == 0:
        raise InputDataError("token sequence must not be empty")
    if arr.min() < 1 or arr.max() > n_bins:
        raise InputDataError(f"tokens must lie in [1, {n_bins}]")
    counts = np.bincount(arr - 1, minlength=n_bins).astype(np.int64)
    return utilization_from_counts(counts)


def utilization_from_counts(counts) -> UtilizationStats:
    counts = np.asarray(counts, dtype=np.int64)
    n_bins = counts.size
    if n_bins < 2:
        raise ConfigurationError("need at least 2 bins")
    if np.any(counts < 0):
        raise InputDataError("counts must be non-negative")
    n = int(counts.sum())
    if n == 0:
        raise InputDataError("token counts must not all be zero")
    expected = n / n_bins
    chi2 = float(np.sum((counts - expected) ** 2) / expected)
    v = math.sqrt(chi2 / (n * (n_bins - 1)))
    p = counts[counts > 0] / n
    entropy = float(-np.sum(p * np.log(p)))
    return UtilizationStats(
        counts=tuple(int(c) for c in counts),
        n=n,
        cramers_v=min(v, 1.0),
        balance=1.0 - min(v, 1.0),
        normalized_entropy=float(np.clip(entropy / math.log(n_bins), 0.0, 1.0)),
    )


@dataclass(frozen=True)
class CorrelationRow:
    """One Spearman correlation, or an explicit undefined marker.

    ``rho`` and ``p_value`` are None when a constant input made the
    correlation undefined; NaN never appears.
    """

    label: str
    rho: float | None
    p_value: float | None
    n_points: int

    @property
    def defined(self) -> bool:
        return self.rho is not None

    def to_dict(self) -> dict:
        return {"label": self.label, "rho": self.rho, "p_value": self.p_value,
                "n_points": self.n_points}

    @classmethod
    def from_dict(cls, obj: dict) -> "CorrelationRow":
        rho = obj["rho"]
        p = obj["p_value"]
        return cls(label=str(obj["label"]),
                   rho=None if rho is None else float(rho),
                   p_value=None if p is None else float(p),
                   n_points=int(obj["n_points"]))


def spearman(xs, ys, label: str = "") -> CorrelationRow:
    """Spearman rank correlation with a two-sided asymptotic p-value.

    Ties receive average ranks; rho is the Pearson correlation of the
    rank vectors. The p-value uses t = rho * sqrt((n - 2) / (1 - rho^2))
    against a t distribution with n - 2 degrees of freedom, and is
    exactly 0 when |rho| = 1. A constant input yields an undefined row.
    """
    x = as_float_array(xs, "xs")
    y = as_float_array(ys, "ys")
    if x.size != y.size:
        raise InputDataError(f"length mismatch: {x.size} vs {y.size}")
    n = x.size
    if n < 3:
        raise InputDataError(f"need at least 3 points, got {n}")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        return CorrelationRow(label=label, rho=None, p_value=None, n_points=n)
    rx = stats.rankdata(x)
    ry = stats.rankdata(y)
    if np.array_equal(rx, ry):
        return CorrelationRow(label=label, rho=1.0, p_value=0.0, n_points=n)
    if np.array_equal(rx + ry, np.full(n, n + 1.0)):
        return CorrelationRow(label=label, rho=-1.0, p_value=0.0, n_points=n)
    rho = float(np.corrcoef(rx, ry)[0, 1])
    rho = max(-1.0, min(1.0, rho))
    if abs(rho) == 1.0:
        p = 0.0
    else:
        t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
        p = float(2.0 * stats.t.sf(abs(t), n - 2))
    return CorrelationRow(label=label, rho=rho, p_value=p, n_points=n)
