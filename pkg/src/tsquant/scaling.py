"""Per-window affine normalization with exact inverses."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import ConfigurationError
from .validation import as_float_array, check_choice

SCALING_SCHEMES = ("mean", "minmax", "normal")


class AffineScaler(TransformerMixin, BaseEstimator):
    """Maps values into a normalized space via ``x_scaled = a * x + b``.

    The pair (a, b) is fitted on a context window only; horizon values
    are transformed with the context statistics, never their own.

    Schemes
    -------
    mean
        a = 1 / mean(|x|), b = 0. Scaled context has mean absolute
        value 1.
    minmax
        a = 1 / (max - min), b = -a * min. Scaled context spans [0, 1].
    normal
        a = 1 / std, b = -mean * a with the population standard
        deviation (divide by the context length). Scaled context has
        mean 0 and standard deviation 1.

    A context whose statistic is degenerate (all zeros for mean,
    constant for minmax and normal) falls back to a = 1, b = -mean(x)
    and sets ``degenerate_``. ``a_`` is positive in every case, so the
    transform is strictly increasing and exactly invertible up to
    rounding.
    """

    def __init__(self, scheme: str = "mean"):
        self.scheme = scheme

    def fit(self, X, y=None):
        check_choice(self.scheme, SCALING_SCHEMES, "scheme")
        x = as_float_array(X, "context")
        if x.size < 2:
            raise ConfigurationError(f"context must have at least 2 points, got {x.size}")
        mean = float(np.mean(x))
        degenerate = False
        if self.scheme == "mean":
            denom = float(np.mean(np.abs(x)))
            if denom == 0.0:
                degenerate = True
            else:
                a, b = 1.0 / denom, 0.0
        elif self.scheme == "minmax":
            lo, hi = float(np.min(x)), float(np.max(x))
            if hi == lo:
                degenerate = True
            else:
                a = 1.0 / (hi - lo)
                b = -(a * lo)
        else:
            sigma = float(np.sqrt(np.mean((x - mean) ** 2)))
            if sigma == 0.0:
                degenerate = True
            else:
                a = 1.0 / sigma
                b = -(mean * a)
        if degenerate:
            a, b = 1.0, -mean
        self.a_ = a
        self.b_ = b
        self.degenerate_ = degenerate
        return self

    def _check_fitted(self):
        if not hasattr(self, "a_"):
            raise NotFittedError("this AffineScaler instance is not fitted yet")

    def transform(self, X) -> np.ndarray:
        self._check_fitted()
        x = as_float_array(X, "values", allow_empty=True)
        return self.a_ * x + self.b_

    def inverse_transform(self, X) -> np.ndarray:
        self._check_fitted()
        x = as_float_array(X, "values", allow_empty=True)
        return (x - self.b_) / self.a_

    def to_dict(self) -> dict:
        self._check_fitted()
        return {"scheme": self.scheme, "a": self.a_, "b": self.b_,
                "degenerate": self.degenerate_}

    @classmethod
    def from_dict(cls, obj: dict) -> "AffineScaler":
        scaler = cls(scheme=check_choice(obj.get("scheme"), SCALING_SCHEMES, "scheme"))
        a = float(obj["a"])
        b = float(obj["b"])
        if not np.isfinite(a) or not np.isfinite(b) or a <= 0.0:
            raise ConfigurationError(f"invalid scaler parameters a={a!r}, b={b!r}")
        scaler.a_ = a
        scaler.b_ = b
        scaler.degenerate_ = bool(obj.get("degenerate", False))
        return scaler
