"""Bin layout construction and token conversion for scaled values.

A layout places B bin centers c_1 < ... < c_B inside a window of total
width W around a center offset mu, with boundaries halfway between
adjacent centers. Values at or beyond the outermost boundaries land in
the first or last bin, which act as catch-alls; such points are counted
as clipped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import ConfigurationError, InputDataError
from .validation import (as_float_array, as_token_array, check_choice,
                         check_finite_float, check_int_at_least,
                         check_positive_float)

BINNING_SCHEMES = ("uniform", "normal", "expdecay")

SPAN_RTOL = 1e-9
MIDPOINT_ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class BinLayout:
    """Immutable set of bin centers and boundaries.

    Invariants checked on construction: centers strictly increasing,
    boundaries interleaved between them, total span equal to ``width``
    up to 1e-9 relative, and midpoint of the outermost centers equal to
    ``center_offset`` up to 1e-9 absolute.
    """

    scheme: str
    n_bins: int
    width: float
    center_offset: float
    centers: np.ndarray
    boundaries: np.ndarray

    def __post_init__(self):
        check_choice(self.scheme, BINNING_SCHEMES, "scheme")
        n = check_int_at_least(self.n_bins, 2, "n_bins")
        width = check_positive_float(self.width, "width")
        offset = check_finite_float(self.center_offset, "center_offset")
        centers = as_float_array(self.centers, "centers")
        boundaries = as_float_array(self.boundaries, "boundaries")
        if centers.size != n:
            raise ConfigurationError(
                f"expected {n} centers, got {centers.size}")
        if boundaries.size != n - 1:
            raise ConfigurationError(
                f"expected {n - 1} boundaries, got {boundaries.size}")
        if np.any(np.diff(centers) <= 0):
            raise ConfigurationError("centers must be strictly increasing")
        if np.any(boundaries <= centers[:-1]) or np.any(boundaries >= centers[1:]):
            raise ConfigurationError("boundaries must lie strictly between adjacent centers")
        span = float(centers[-1] - centers[0])
        if abs(span - width) > SPAN_RTOL * width:
            raise ConfigurationError(
                f"center span {span!r} does not match width {width!r}")
        midpoint = float(0.5 * (centers[0] + centers[-1]))
        if abs(midpoint - offset) > MIDPOINT_ATOL:
            raise ConfigurationError(
                f"center midpoint {midpoint!r} does not match offset {offset!r}")
        centers.setflags(write=False)
        boundaries.setflags(write=False)
        object.__setattr__(self, "n_bins", n)
        object.__setattr__(self, "width", width)
        object.__setattr__(self, "center_offset", offset)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "boundaries", boundaries)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "B": self.n_bins,
            "width": self.width,
            "center_offset": self.center_offset,
            "centers": [float(c) for c in self.centers],
            "boundaries": [float(b) for b in self.boundaries],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "BinLayout":
        try:
            return cls(
                scheme=obj["scheme"],
                n_bins=obj["B"],
                width=obj["width"],
                center_offset=obj["center_offset"],
                centers=np.asarray(obj["centers"], dtype=np.float64),
                boundaries=np.asarray(obj["boundaries"], dtype=np.float64),
            )
        except KeyError as exc:
            raise ConfigurationError(f"layout is missing key {exc}") from exc


@dataclass(frozen=True, eq=False)
class TokenSequence:
    """Tokens in 1..B plus clip counters, tied to the layout that made them."""

    tokens: np.ndarray
    layout: BinLayout
    clipped_low: int
    clipped_high: int

    def __post_init__(self):
        tokens = as_token_array(self.tokens)
        if tokens.size:
            if tokens.min() < 1 or tokens.max() > self.layout.n_bins:
                raise InputDataError(
                    f"tokens must lie in [1, {self.layout.n_bins}]")
        tokens.setflags(write=False)
        object.__setattr__(self, "tokens", tokens)

    def __len__(self) -> int:
        return int(self.tokens.size)


def _raw_centers(scheme: str, n_bins: int) -> np.ndarray:
    """Unit-scale center profile, exactly antisymmetric around zero."""
    i = np.arange(1, n_bins + 1, dtype=np.float64)
    if scheme == "uniform":
        raw = np.linspace(-0.5, 0.5, n_bins)
    elif scheme == "normal":
        raw = norm.ppf((2.0 * i - 1.0) / (2.0 * n_bins))
    else:
        u = -1.0 + (2.0 * i - 1.0) / n_bins
        raw = np.sign(u) * (-np.log1p(-np.abs(u)))
    # Symmetrize so the midpoint of the outer centers is exactly zero.
    return 0.5 * (raw - raw[::-1])


def build_layout(scheme: str, n_bins: int, width: float,
                 center_offset: float = 0.0) -> BinLayout:
    """Construct a bin layout.

    uniform spaces centers evenly across the span. normal places them
    at mid-quantiles of a standard normal, so spacing tightens toward
    the middle. expdecay uses mid-quantiles of a symmetric exponential,
    tightening even harder toward the middle while reserving wide outer
    bins. Non-uniform profiles are rescaled so the outermost centers
    span exactly ``width`` and shifted so their midpoint sits at
    ``center_offset``.
    """
    check_choice(scheme, BINNING_SCHEMES, "scheme")
    n_bins = check_int_at_least(n_bins, 2, "n_bins")
    width = check_positive_float(width, "width")
    center_offset = check_finite_float(center_offset, "center_offset")
    raw = _raw_centers(scheme, n_bins)
    centers = center_offset + raw * (width / (raw[-1] - raw[0]))
    boundaries = 0.5 * (centers[:-1] + centers[1:])
    return BinLayout(scheme=scheme, n_bins=n_bins, width=width,
                     center_offset=center_offset, centers=centers,
                     boundaries=boundaries)


def quantize(layout: BinLayout, values) -> TokenSequence:
    """Map scaled values to 1-based tokens.

    A value below the first boundary takes token 1, a value at or above
    the last boundary takes token B, and a value exactly on an interior
    boundary joins the upper bin. Because boundaries sit halfway
    between centers, each value maps to its nearest center (upper bin
    on ties).
    """
    x = as_float_array(values, "values", allow_empty=True)
    idx = np.searchsorted(layout.boundaries, x, side="right")
    clipped_low = int(np.count_nonzero(x < layout.boundaries[0]))
    clipped_high = int(np.count_nonzero(x >= layout.boundaries[-1]))
    return TokenSequence(tokens=idx + 1, layout=layout,
                         clipped_low=clipped_low, clipped_high=clipped_high)


def dequantize(layout: BinLayout, tokens) -> np.ndarray:
    """Map tokens back to their bin centers."""
    if isinstance(tokens, TokenSequence):
        tokens = tokens.tokens
    arr = as_token_array(tokens)
    if arr.size and (arr.min() < 1 or arr.max() > layout.n_bins):
        raise InputDataError(f"tokens must lie in [1, {layout.n_bins}]")
    return layout.centers[arr - 1]


class BinQuantizer(TransformerMixin, BaseEstimator):
    """Estimator wrapper around a fixed bin layout.

    ``fit`` ignores the data; the layout is fully determined by the
    constructor parameters. Provided so the quantization step composes
    with pipeline tooling.
    """

    def __init__(self, scheme: str = "uniform", n_bins: int = 512,
                 width: float = 1.0, center_offset: float = 0.0):
        self.scheme = scheme
        self.n_bins = n_bins
        self.width = width
        self.center_offset = center_offset

    def fit(self, X=None, y=None):
        self.layout_ = build_layout(self.scheme, self.n_bins, self.width,
                                    self.center_offset)
        return self

    def _check_fitted(self):
        if not hasattr(self, "layout_"):
            raise NotFittedError("this BinQuantizer instance is not fitted yet")

    def tokenize(self, X) -> TokenSequence:
        self._check_fitted()
        return quantize(self.layout_, X)

    def transform(self, X) -> np.ndarray:
        return self.tokenize(X).tokens

    def inverse_transform(self, tokens) -> np.ndarray:
        self._check_fitted()
        return dequantize(self.layout_, tokens)
