"""Small input validation helpers used at every public entry point."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import ConfigurationError, InputDataError


def as_float_array(values, name: str = "values", *, allow_empty: bool = False,
                   require_finite: bool = True) -> np.ndarray:
    """Coerce ``values`` to a 1-D float64 array, validating shape and finiteness."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InputDataError(f"{name} must be one dimensional, got shape {arr.shape}")
    if not allow_empty and arr.size == 0:
        raise InputDataError(f"{name} must not be empty")
    if require_finite and arr.size and not np.all(np.isfinite(arr)):
        raise InputDataError(f"{name} contains non-finite values")
    return arr


def as_token_array(tokens, name: str = "tokens") -> np.ndarray:
    """Coerce ``tokens`` to a 1-D int64 array, rejecting non-integral input."""
    arr = np.asarray(tokens)
    if arr.ndim != 1:
        raise InputDataError(f"{name} must be one dimensional, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not (np.issubdtype(arr.dtype, np.floating) and np.all(arr == np.floor(arr))):
            raise InputDataError(f"{name} must contain integers")
    return arr.astype(np.int64)


def check_choice(value: str, choices: Sequence[str], name: str) -> str:
    if value not in choices:
        raise ConfigurationError(
            f"{name} must be one of {', '.join(choices)}; got {value!r}")
    return value


def check_int_at_least(value, minimum: int, name: str) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_positive_float(value, name: str) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be a number, got {value!r}") from None
    if not np.isfinite(out) or out <= 0.0:
        raise ConfigurationError(f"{name} must be a positive finite number, got {value!r}")
    return out


def check_finite_float(value, name: str) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be a number, got {value!r}") from None
    if not np.isfinite(out):
        raise ConfigurationError(f"{name} must be finite, got {value!r}")
    return out
