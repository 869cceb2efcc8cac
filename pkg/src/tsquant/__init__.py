"""tsquant: scale-then-quantize tokenization for time series.

The core pipeline fits an affine scaler on a context window, quantizes
scaled values into a fixed bin layout, and inverts both steps to get a
reconstruction. Around it sit a perfect-predictor error bound (the
floor any model using a given tokenizer can reach), a bin width tuner,
token utilization statistics, and sweep tooling that fits power laws
and rank correlations across configurations.
"""

__version__ = "0.1.0"

from .data import (Dataset, TimeSeriesWindow, generate_series,
                   generate_synthetic, load_csv, load_dataset, load_jsonl,
                   save_csv, save_jsonl, window_series)
from .errors import (ConfigurationError, InputDataError, InternalError,
                     TsquantError, ZeroSeasonalError)
from .metrics import (CorrelationRow, UtilizationStats, mase, seasonal_error,
                      spearman, utilization, utilization_from_counts)
from .oracle import (OracleResult, TuneResult, WidthSearchSpec, oracle_evaluate,
                     oracle_reconstruction, tune_width)
from .quantizer import (BINNING_SCHEMES, BinLayout, BinQuantizer, TokenSequence,
                        build_layout, dequantize, quantize)
from .scaling import SCALING_SCHEMES, AffineScaler
from .sweep import (DEFAULT_VOCAB_SIZES, STANDOUT_PAIRS, PowerLawFit,
                    SlopeComparison, SweepEntry, SweepReport, correlation_table,
                    effective_thread_count, fit_powerlaw, load_report,
                    pooled_utilization, run_sweep, slope_equality,
                    write_correlations_csv, write_report)
from .tokenizer import (DEFAULT_WIDTHS, TimeSeriesTokenizer, TokenizerConfig,
                        default_center_offset)

__all__ = [
    "AffineScaler",
    "BINNING_SCHEMES",
    "BinLayout",
    "BinQuantizer",
    "ConfigurationError",
    "CorrelationRow",
    "DEFAULT_VOCAB_SIZES",
    "DEFAULT_WIDTHS",
    "Dataset",
    "InputDataError",
    "InternalError",
    "OracleResult",
    "PowerLawFit",
    "SCALING_SCHEMES",
    "STANDOUT_PAIRS",
    "SlopeComparison",
    "SweepEntry",
    "SweepReport",
    "TimeSeriesTokenizer",
    "TimeSeriesWindow",
    "TokenSequence",
    "TokenizerConfig",
    "TsquantError",
    "TuneResult",
    "UtilizationStats",
    "WidthSearchSpec",
    "ZeroSeasonalError",
    "build_layout",
    "correlation_table",
    "default_center_offset",
    "dequantize",
    "effective_thread_count",
    "fit_powerlaw",
    "generate_series",
    "generate_synthetic",
    "load_csv",
    "load_dataset",
    "load_jsonl",
    "load_report",
    "mase",
    "oracle_evaluate",
    "oracle_reconstruction",
    "pooled_utilization",
    "quantize",
    "run_sweep",
    "save_csv",
    "save_jsonl",
    "seasonal_error",
    "slope_equality",
    "spearman",
    "tune_width",
    "utilization",
    "utilization_from_counts",
    "window_series",
    "write_correlations_csv",
    "write_report",
]
