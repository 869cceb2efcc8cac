"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2,
input data problems exit 1, anything else raised from inside the
library exits 3.
"""

from __future__ import annotations


class TsquantError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(TsquantError, ValueError):
    """A parameter value is outside its documented domain."""


class InputDataError(TsquantError, ValueError):
    """Input data is missing, malformed, or unusable."""


class ZeroSeasonalError(TsquantError, ArithmeticError):
    """The seasonal naive error of a context is exactly zero.

    MASE is undefined in this case; callers decide whether to skip
    the window or abort.
    """


class InternalError(TsquantError):
    """An internal invariant was violated. Always a bug."""
