"""Grid sweeps over tokenizer configurations, with downstream analysis.

A sweep evaluates the oracle bound and token utilization for every
requested (scaling, binning, vocabulary size) cell, fits a power law
to MASE as a function of vocabulary size for each scheme pair, and
correlates utilization against the bound across configurations at each
vocabulary size.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .data import Dataset
from .errors import ConfigurationError, InputDataError
from .metrics import (CorrelationRow, UtilizationStats, spearman,
                      utilization_from_counts)
from .oracle import OracleResult, WidthSearchSpec, oracle_evaluate, tune_width
from .quantizer import BINNING_SCHEMES, quantize
from .scaling import SCALING_SCHEMES, AffineScaler
from .tokenizer import DEFAULT_WIDTHS, TokenizerConfig

SCHEMA_VERSION = 1

DEFAULT_VOCAB_SIZES = (512, 1024, 4096)

# The three scheme pairs worth tracking closely: the plain baseline and
# the two pairings that consistently lead on the oracle bound.
STANDOUT_PAIRS = (("mean", "uniform"), ("mean", "normal"), ("normal", "uniform"))

THREADS_ENV_VAR = "TSQUANT_THREADS"


def effective_thread_count() -> int:
    """Worker cap from the environment; unset or invalid means serial."""
    raw = os.environ.get(THREADS_ENV_VAR, "")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(value, 1)


@dataclass(frozen=True)
class SweepEntry:
    config: TokenizerConfig
    oracle: OracleResult
    utilization: UtilizationStats

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "oracle": self.oracle.to_dict(),
                "utilization": self.utilization.to_dict()}

    @classmethod
    def from_dict(cls, obj: dict) -> "SweepEntry":
        return cls(config=TokenizerConfig.from_dict(obj["config"]),
                   oracle=OracleResult.from_dict(obj["oracle"]),
                   utilization=UtilizationStats.from_dict(obj["utilization"]))


@dataclass(frozen=True)
class PowerLawFit:
    """OLS fit of log(mase) against log(B): mase ~ exp(intercept) * B ** slope."""

    slope: float
    intercept: float
    r_squared: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "r_squared": self.r_squared, "degenerate": self.degenerate}

    @classmethod
    def from_dict(cls, obj: dict) -> "PowerLawFit":
        return cls(slope=float(obj["slope"]), intercept=float(obj["intercept"]),
                   r_squared=float(obj["r_squared"]),
                   degenerate=bool(obj.get("degenerate", False)))


@dataclass(frozen=True)
class SlopeComparison:
    """Pairwise slope deltas and whether they all sit within tolerance."""

    equal: bool
    max_delta: float
    deltas: dict

    def to_dict(self) -> dict:
        return {"equal": self.equal, "max_delta": self.max_delta,
                "deltas": {" vs ".join(k): v for k, v in self.deltas.items()}}


@dataclass(frozen=True)
class SweepReport:
    entries: tuple[SweepEntry, ...]
    powerlaw_fits: dict
    correlations: tuple[CorrelationRow, ...]
    metadata: dict

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "metadata": dict(self.metadata),
            "entries": [e.to_dict() for e in self.entries],
            "powerlaw_fits": {k: f.to_dict() for k, f in self.powerlaw_fits.items()},
            "correlations": [c.to_dict() for c in self.correlations],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "SweepReport":
        return cls(
            entries=tuple(SweepEntry.from_dict(e) for e in obj["entries"]),
            powerlaw_fits={k: PowerLawFit.from_dict(f)
                           for k, f in obj.get("powerlaw_fits", {}).items()},
            correlations=tuple(CorrelationRow.from_dict(c)
                               for c in obj.get("correlations", [])),
            metadata=dict(obj.get("metadata", {})),
        )


def pooled_utilization(config: TokenizerConfig, dataset: Dataset) -> UtilizationStats:
    """Token histogram over every window's context and horizon combined.

    Each window is scaled with its own context-fitted scaler before
    tokenization, matching how the data would be fed to a model.
    """
    layout = config.build_layout()
    counts = np.zeros(config.n_bins, dtype=np.int64)
    for window in dataset:
        scaler = AffineScaler(config.scaling).fit(window.context)
        for part in (window.context, window.horizon):
            seq = quantize(layout, scaler.transform(part))
            counts += np.bincount(seq.tokens - 1, minlength=config.n_bins)
    return utilization_from_counts(counts)


def fit_powerlaw(points) -> PowerLawFit:
    """Fit mase = C * B ** slope by least squares in log-log space.

    ``points`` is an iterable of (vocab_size, mase) with at least three
    distinct vocabulary sizes and strictly positive mase. A perfectly
    flat set of points is reported as slope 0 with r_squared 1 and the
    degenerate flag set.
    """
    pts = [(float(b), float(m)) for b, m in points]
    if len(pts) < 3:
        raise ConfigurationError(f"need at least 3 points, got {len(pts)}")
    bs = np.array([p[0] for p in pts])
    ms = np.array([p[1] for p in pts])
    if len(set(bs.tolist())) != len(pts):
        raise ConfigurationError("vocabulary sizes must be distinct")
    if np.any(bs <= 0) or np.any(ms <= 0):
        raise ConfigurationError("points must be strictly positive")
    lx = np.log(bs)
    ly = np.log(ms)
    dx = lx - lx.mean()
    dy = ly - ly.mean()
    slope = float(np.sum(dx * dy) / np.sum(dx * dx))
    intercept = float(ly.mean() - slope * lx.mean())
    ss_tot = float(np.sum(dy * dy))
    if ss_tot == 0.0:
        return PowerLawFit(slope=0.0, intercept=float(ly.mean()),
                           r_squared=1.0, degenerate=True)
    ss_res = float(np.sum((ly - (intercept + slope * lx)) ** 2))
    r_squared = float(np.clip(1.0 - ss_res / ss_tot, 0.0, 1.0))
    return PowerLawFit(slope=slope, intercept=intercept, r_squared=r_squared)


def slope_equality(fits, tolerance: float) -> SlopeComparison:
    """Check that all pairwise slope differences stay within tolerance.

    ``fits`` is a mapping from label to PowerLawFit or a sequence of
    fits (labelled by position). Deltas for every pair are always
    reported.
    """
    if hasattr(fits, "items"):
        items = list(fits.items())
    else:
        items = [(str(i), f) for i, f in enumerate(fits)]
    if len(items) < 2:
        raise ConfigurationError("need at least 2 fits to compare")
    deltas = {}
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            (la, fa), (lb, fb) = items[i], items[j]
            deltas[(la, lb)] = abs(fa.slope - fb.slope)
    max_delta = max(deltas.values())
    return SlopeComparison(equal=max_delta <= tolerance, max_delta=max_delta,
                           deltas=deltas)


def _correlations_for_entries(entries) -> list[CorrelationRow]:
    by_vocab: dict[int, list[SweepEntry]] = {}
    for entry in entries:
        by_vocab.setdefault(entry.config.n_bins, []).append(entry)
    rows = []
    for vocab in sorted(by_vocab):
        group = by_vocab[vocab]
        if len(group) < 3:
            raise ConfigurationError(
                f"need at least 3 configs at vocabulary size {vocab}, got {len(group)}")
        mases = [e.oracle.mean_mase for e in group]
        vs = [e.utilization.cramers_v for e in group]
        balances = [e.utilization.balance for e in group]
        rows.append(spearman(vs, mases, label=f"cramers_v_vs_mase@B={vocab}"))
        rows.append(spearman(balances, mases, label=f"balance_vs_mase@B={vocab}"))
    return rows


def correlation_table(report: SweepReport) -> list[CorrelationRow]:
    """Spearman correlation of utilization against the oracle bound.

    For each vocabulary size in the report, ranks the configurations by
    Cramer's V and by balance and correlates each ordering with oracle
    mean MASE. Both orientations are reported; balance rows are the V
    rows with the sign flipped. Requires at least 3 configurations per
    vocabulary size.
    """
    return _correlations_for_entries(report.entries)


def _scheme_pairs(scalings, binnings, pairs):
    if pairs is not None:
        out = [(s, b) for s, b in pairs]
    else:
        order_s = [s for s in SCALING_SCHEMES if s in set(scalings)]
        order_b = [b for b in BINNING_SCHEMES if b in set(binnings)]
        if len(order_s) != len(set(scalings)) or len(order_b) != len(set(binnings)):
            bad = (set(scalings) - set(SCALING_SCHEMES)) | (set(binnings) - set(BINNING_SCHEMES))
            raise ConfigurationError(f"unknown scheme(s): {', '.join(sorted(bad))}")
        out = [(s, b) for s in order_s for b in order_b]
    if not out:
        raise ConfigurationError("empty scheme grid")
    return out


def run_sweep(dataset: Dataset, scalings=SCALING_SCHEMES, binnings=BINNING_SCHEMES,
              vocab_sizes=DEFAULT_VOCAB_SIZES, tune: bool = True, *,
              pairs=None, width: float | None = None,
              search: WidthSearchSpec | None = None, seed: int = 0) -> SweepReport:
    """Evaluate every requested cell and assemble the full report.

    With ``tune`` the width of each cell is optimized independently;
    otherwise ``width`` applies everywhere (falling back to per-scaling
    defaults when None). ``pairs`` replaces the scalings x binnings
    cross product with an explicit list of scheme pairs. Cells are
    processed in a canonical order; the worker cap from TSQUANT_THREADS
    never changes the result.

    Power-law fits require at least three vocabulary sizes and
    correlations at least three configurations per vocabulary size;
    each is omitted when the grid is too small.
    """
    vocabs = sorted({int(v) for v in vocab_sizes})
    if not vocabs:
        raise ConfigurationError("vocab_sizes must not be empty")
    scheme_pairs = _scheme_pairs(scalings, binnings, pairs)
    cells = [(s, b, v) for s, b in scheme_pairs for v in vocabs]

    def run_cell(cell) -> SweepEntry:
        scaling, binning, vocab = cell
        if tune:
            tuned = tune_width(scaling, binning, vocab, dataset, search)
            config, oracle = tuned.result.config, tuned.result
        else:
            cell_width = width if width is not None else DEFAULT_WIDTHS[scaling]
            config = TokenizerConfig(scaling=scaling, binning=binning,
                                     n_bins=vocab, width=cell_width)
            oracle = oracle_evaluate(config, dataset)
        return SweepEntry(config=config, oracle=oracle,
                          utilization=pooled_utilization(config, dataset))

    workers = effective_thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = tuple(pool.map(run_cell, cells))
    else:
        entries = tuple(run_cell(c) for c in cells)

    fits = {}
    if len(vocabs) >= 3:
        for scaling, binning in scheme_pairs:
            points = [(e.config.n_bins, e.oracle.mean_mase) for e in entries
                      if (e.config.scaling, e.config.binning) == (scaling, binning)]
            if all(m > 0 for _, m in points):
                fits[f"{scaling}&{binning}"] = fit_powerlaw(points)

    correlations = ()
    if len(scheme_pairs) >= 3:
        correlations = tuple(_correlations_for_entries(entries))

    metadata = {
        "dataset_tag": dataset.source_tag,
        "n_windows": len(dataset),
        "seed": int(seed),
        "tool_version": __version__,
        "tuned": bool(tune),
    }
    return SweepReport(entries=entries, powerlaw_fits=fits,
                       correlations=correlations, metadata=metadata)


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_report(report: SweepReport, output_dir) -> dict:
    """Write the report JSON and its CSV companions into a directory.

    Produces sweep_report.json, bounds.csv, powerlaw.csv,
    correlations.csv, and one utilization histogram CSV per cell. All
    numeric fields are written with 17 significant digits so reruns are
    byte-identical. Returns a name-to-path mapping.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}

    report_path = out / "sweep_report.json"
    with report_path.open("w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    paths["report"] = report_path

    bounds_path = out / "bounds.csv"
    _write_csv(
        bounds_path,
        ["scaling", "binning", "B", "width", "mean_mase", "median_mase",
         "clip_fraction"],
        [[e.config.scaling, e.config.binning, e.config.n_bins, e.config.width,
          e.oracle.mean_mase, e.oracle.median_mase, e.oracle.clip_fraction]
         for e in report.entries])
    paths["bounds"] = bounds_path

    powerlaw_path = out / "powerlaw.csv"
    rows = []
    for key, fit in report.powerlaw_fits.items():
        scaling, _, binning = key.partition("&")
        rows.append([scaling, binning, fit.slope, fit.intercept,
                     fit.r_squared, fit.degenerate])
    _write_csv(powerlaw_path,
               ["scaling", "binning", "slope", "intercept", "r_squared", "degenerate"],
               rows)
    paths["powerlaw"] = powerlaw_path

    correlations_path = out / "correlations.csv"
    write_correlations_csv(report.correlations, correlations_path)
    paths["correlations"] = correlations_path

    for entry in report.entries:
        util_path = out / f"utilization_{entry.config.slug()}.csv"
        _write_csv(util_path, ["token", "count"],
                   [[i + 1, c] for i, c in enumerate(entry.utilization.counts)])
        paths[f"utilization_{entry.config.slug()}"] = util_path
    return paths


def write_correlations_csv(rows, path) -> None:
    """Correlation rows as CSV; undefined rows keep empty rho and p cells."""
    _write_csv(Path(path),
               ["label", "rho", "p_value", "n_points", "defined"],
               [[r.label,
                 "" if r.rho is None else _fmt(r.rho),
                 "" if r.p_value is None else _fmt(r.p_value),
                 r.n_points, r.defined]
                for r in rows])


def load_report(path) -> SweepReport:
    try:
        with Path(path).open("r") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InputDataError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputDataError(f"{path}: invalid JSON: {exc}") from exc
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise InputDataError(
            f"{path}: unsupported schema_version {obj.get('schema_version')!r}")
    return SweepReport.from_dict(obj)
