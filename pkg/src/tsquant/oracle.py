"""Perfect-predictor lower bound and width tuning.

The oracle knows the true horizon and is limited only by the tokenizer:
each horizon is scaled with context statistics, pushed through the
quantizer, and mapped back. The resulting MASE is the floor no model
using that tokenizer can beat, so it isolates tokenization loss from
modeling loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ConfigurationError, InputDataError, ZeroSeasonalError
from .metrics import mase
from .quantizer import dequantize, quantize
from .scaling import AffineScaler
from .tokenizer import TokenizerConfig
from .validation import check_int_at_least, check_positive_float

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OracleResult:
    """Aggregate tokenizer-floor error over a dataset.

    ``clip_fraction`` is the share of horizon points of scored windows
    that fell into a catch-all bin. Windows whose context has zero
    seasonal error cannot be scored and are counted separately.
    """

    config: TokenizerConfig
    mean_mase: float
    median_mase: float
    n_windows_scored: int
    n_windows_skipped: int
    clip_fraction: float

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "mean_mase": self.mean_mase,
            "median_mase": self.median_mase,
            "n_windows_scored": self.n_windows_scored,
            "n_windows_skipped": self.n_windows_skipped,
            "clip_fraction": self.clip_fraction,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "OracleResult":
        return cls(config=TokenizerConfig.from_dict(obj["config"]),
                   mean_mase=float(obj["mean_mase"]),
                   median_mase=float(obj["median_mase"]),
                   n_windows_scored=int(obj["n_windows_scored"]),
                   n_windows_skipped=int(obj["n_windows_skipped"]),
                   clip_fraction=float(obj["clip_fraction"]))


def oracle_reconstruction(config: TokenizerConfig, window, layout=None):
    """Round-trip one window's true horizon through the tokenizer.

    Returns (reconstructed horizon in raw units, token sequence, scaler).
    """
    if layout is None:
        layout = config.build_layout()
    scaler = AffineScaler(config.scaling).fit(window.context)
    seq = quantize(layout, scaler.transform(window.horizon))
    recon = scaler.inverse_transform(dequantize(layout, seq.tokens))
    return recon, seq, scaler


def oracle_evaluate(config: TokenizerConfig, dataset: Dataset) -> OracleResult:
    """Score the perfect predictor under ``config`` on every window.

    Deterministic: identical inputs give bit-identical results. The
    per-window MASE values are aggregated with numpy's pairwise
    summation in dataset order, so the outcome does not depend on any
    parallel schedule.
    """
    layout = config.build_layout()
    scores = []
    skipped = 0
    clipped = 0
    points = 0
    for window in dataset:
        recon, seq, _ = oracle_reconstruction(config, window, layout)
        try:
            score = mase(window.horizon, recon, window.context, window.seasonality)
        except ZeroSeasonalError:
            skipped += 1
            continue
        scores.append(score)
        clipped += seq.clipped_low + seq.clipped_high
        points += window.horizon_len
    if not scores:
        raise InputDataError(
            "no scoreable window: every context has zero seasonal error")
    arr = np.asarray(scores, dtype=np.float64)
    return OracleResult(
        config=config,
        mean_mase=float(np.mean(arr)),
        median_mase=float(np.median(arr)),
        n_windows_scored=len(scores),
        n_windows_skipped=skipped,
        clip_fraction=clipped / points,
    )


@dataclass(frozen=True)
class WidthSearchSpec:
    """Search range and budget for width tuning.

    ``budget`` caps the total number of oracle evaluations across both
    stages and must cover at least the coarse grid. Refinement stops
    once the bracket's relative width drops below ``rel_tol``.
    """

    w_lo: float = 0.25
    w_hi: float = 256.0
    grid_points: int = 25
    budget: int = 64
    rel_tol: float = 1e-2

    def __post_init__(self):
        lo = check_positive_float(self.w_lo, "w_lo")
        hi = check_positive_float(self.w_hi, "w_hi")
        if lo >= hi:
            raise ConfigurationError(f"empty width range [{lo}, {hi}]")
        check_int_at_least(self.grid_points, 2, "grid_points")
        check_int_at_least(self.budget, 1, "budget")
        if self.budget < self.grid_points:
            raise ConfigurationError(
                f"budget {self.budget} is smaller than grid_points {self.grid_points}")
        check_positive_float(self.rel_tol, "rel_tol")


@dataclass(frozen=True)
class TuneResult:
    """Best width found, its oracle result, and the full search trace."""

    width: float
    result: OracleResult
    trace: tuple[tuple[float, float], ...]


def tune_width(scaling: str, binning: str, n_bins: int, dataset: Dataset,
               search: WidthSearchSpec | None = None,
               center_offset: float | None = None) -> TuneResult:
    """Minimize oracle mean MASE over the bin width.

    Stage one evaluates a logarithmic grid across the search range;
    stage two runs a golden-section refinement (in log width) inside
    the bracket around the best grid point. Ties always resolve toward
    the smaller width. Deterministic for identical inputs.
    """
    if search is None:
        search = WidthSearchSpec()
    evaluated: list[tuple[float, OracleResult]] = []

    def evaluate(width: float) -> float:
        config = TokenizerConfig(scaling=scaling, binning=binning, n_bins=n_bins,
                                 width=float(width), center_offset=center_offset)
        result = oracle_evaluate(config, dataset)
        evaluated.append((float(width), result))
        return result.mean_mase

    grid = np.geomspace(search.w_lo, search.w_hi, search.grid_points)
    grid_scores = [evaluate(w) for w in grid]
    best_i = int(np.argmin(grid_scores))
    remaining = search.budget - search.grid_points

    lo = math.log(grid[max(best_i - 1, 0)])
    hi = math.log(grid[min(best_i + 1, len(grid) - 1)])
    # Bracket convergence test (hi - lo) / hi < rel_tol, written in logs.
    log_tol = -math.log1p(-search.rel_tol)
    if remaining >= 2 and hi - lo > log_tol:
        c = hi - INV_PHI * (hi - lo)
        d = lo + INV_PHI * (hi - lo)
        fc = evaluate(math.exp(c))
        fd = evaluate(math.exp(d))
        remaining -= 2
        while remaining > 0 and hi - lo > log_tol:
            if fc <= fd:
                hi, d, fd = d, c, fc
                c = hi - INV_PHI * (hi - lo)
                fc = evaluate(math.exp(c))
            else:
                lo, c, fc = c, d, fd
                d = lo + INV_PHI * (hi - lo)
                fd = evaluate(math.exp(d))
            remaining -= 1

    best_width, best_result = min(
        evaluated, key=lambda item: (item[1].mean_mase, item[0]))
    trace = tuple((w, r.mean_mase) for w, r in evaluated)
    return TuneResult(width=best_width, result=best_result, trace=trace)
