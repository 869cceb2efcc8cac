"""Window containers, dataset ingestion, and synthetic series generators.

A window is a contiguous (context, horizon) slice of one series. Files
are split into windows by tiling each series with disjoint blocks of
``context_len + horizon_len`` points starting at index 0; a trailing
remainder shorter than one block is discarded.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigurationError, InputDataError
from .validation import as_float_array, check_int_at_least

logger = logging.getLogger(__name__)

CSV_HEADER = ("series_id", "timestamp_index", "value")

SYNTHETIC_KINDS = ("gaussian_ar1", "heavy_tailed", "seasonal_sine")

AR1_COEFF = 0.8
SINE_PERIOD = 24
SINE_NOISE_STD = 0.1


def _fmt(x: float) -> str:
    # 17 significant digits round-trip any double exactly.
    return format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class TimeSeriesWindow:
    """One evaluation unit: a context slice followed by a horizon slice.

    Parameters
    ----------
    series_id : str
        Identifier of the source series.
    context : array-like
        Observed values the model may condition on. Length >= 2.
    horizon : array-like
        Values to be predicted. Length >= 1.
    seasonality : int, default 1
        Lag used by the seasonal naive baseline. Must satisfy
        ``1 <= seasonality < len(context)``.
    """

    series_id: str
    context: np.ndarray
    horizon: np.ndarray
    seasonality: int = 1

    def __post_init__(self):
        ctx = as_float_array(self.context, "context")
        hor = as_float_array(self.horizon, "horizon")
        if ctx.size < 2:
            raise InputDataError(f"context must have at least 2 points, got {ctx.size}")
        if hor.size < 1:
            raise InputDataError("horizon must have at least 1 point")
        m = self.seasonality
        if not isinstance(m, (int, np.integer)) or isinstance(m, bool):
            raise InputDataError(f"seasonality must be an integer, got {m!r}")
        if not 1 <= m < ctx.size:
            raise InputDataError(
                f"seasonality must be in [1, {ctx.size - 1}], got {m}")
        ctx.setflags(write=False)
        hor.setflags(write=False)
        object.__setattr__(self, "context", ctx)
        object.__setattr__(self, "horizon", hor)
        object.__setattr__(self, "seasonality", int(m))

    @property
    def context_len(self) -> int:
        return self.context.size

    @property
    def horizon_len(self) -> int:
        return self.horizon.size


@dataclass(frozen=True, eq=False)
class Dataset:
    """An ordered, non-empty collection of windows.

    ``n_dropped_series`` counts source series that were discarded
    wholesale during ingestion because they contained non-finite values.
    """

    windows: tuple[TimeSeriesWindow, ...]
    source_tag: str = ""
    n_dropped_series: int = 0

    def __post_init__(self):
        wins = tuple(self.windows)
        if not wins:
            raise InputDataError("dataset must contain at least one window")
        for w in wins:
            if not isinstance(w, TimeSeriesWindow):
                raise InputDataError(f"dataset entries must be windows, got {type(w)!r}")
        object.__setattr__(self, "windows", wins)

    def __len__(self) -> int:
        return len(self.windows)

    def __iter__(self) -> Iterator[TimeSeriesWindow]:
        return iter(self.windows)


def window_series(values, series_id: str, context_len: int, horizon_len: int,
                  seasonality: int = 1) -> list[TimeSeriesWindow]:
    """Tile one series into disjoint (context, horizon) windows.

    Block k covers indices ``[k * span, (k + 1) * span)`` with
    ``span = context_len + horizon_len``. A series shorter than one
    block yields no windows.
    """
    context_len = check_int_at_least(context_len, 2, "context_len")
    horizon_len = check_int_at_least(horizon_len, 1, "horizon_len")
    arr = as_float_array(values, f"series {series_id!r}", require_finite=False)
    span = context_len + horizon_len
    windows = []
    for k in range(arr.size // span):
        block = arr[k * span:(k + 1) * span]
        windows.append(TimeSeriesWindow(
            series_id=series_id,
            context=block[:context_len],
            horizon=block[context_len:],
            seasonality=seasonality,
        ))
    return windows


def _assemble(series: list[tuple[str, np.ndarray]], context_len: int, horizon_len: int,
              seasonality: int, source_tag: str) -> Dataset:
    windows: list[TimeSeriesWindow] = []
    dropped = 0
    for sid, values in series:
        if not np.all(np.isfinite(values)):
            dropped += 1
            logger.warning("dropping series %r: non-finite values present", sid)
            continue
        windows.extend(window_series(values, sid, context_len, horizon_len, seasonality))
    if not windows:
        raise InputDataError(f"{source_tag}: zero usable windows")
    return Dataset(windows=tuple(windows), source_tag=source_tag, n_dropped_series=dropped)


def load_csv(path, context_len: int, horizon_len: int, seasonality: int = 1) -> Dataset:
    """Load a ``series_id,timestamp_index,value`` CSV and window it.

    Rows belonging to one series must be contiguous and ordered by
    strictly increasing timestamp index. Series containing NaN or
    infinite values are dropped with a logged warning and counted in
    ``Dataset.n_dropped_series``.
    """
    path = Path(path)
    try:
        fh = path.open("r", newline="")
    except OSError as exc:
        raise InputDataError(f"cannot read {path}: {exc}") from exc
    series: list[tuple[str, list[float]]] = []
    seen: set[str] = set()
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise InputDataError(
                f"{path}: expected header {','.join(CSV_HEADER)}, got {header!r}")
        current_id = None
        last_index = None
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise InputDataError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            sid = row[0]
            try:
                idx = int(row[1])
                value = float(row[2])
            except ValueError as exc:
                raise InputDataError(f"{path}:{lineno}: malformed row: {exc}") from exc
            if sid != current_id:
                if sid in seen:
                    raise InputDataError(
                        f"{path}:{lineno}: rows for series {sid!r} are not contiguous")
                seen.add(sid)
                series.append((sid, []))
                current_id = sid
                last_index = None
            if last_index is not None and idx <= last_index:
                raise InputDataError(
                    f"{path}:{lineno}: timestamp_index not increasing for series {sid!r}")
            last_index = idx
            series[-1][1].append(value)
    arrays = [(sid, np.asarray(vals, dtype=np.float64)) for sid, vals in series]
    return _assemble(arrays, context_len, horizon_len, seasonality, str(path))


def load_jsonl(path, context_len: int, horizon_len: int, seasonality: int = 1) -> Dataset:
    """Load a JSON-lines file with one ``{"id": ..., "values": [...]}`` object per line."""
    path = Path(path)
    try:
        fh = path.open("r")
    except OSError as exc:
        raise InputDataError(f"cannot read {path}: {exc}") from exc
    series: list[tuple[str, np.ndarray]] = []
    seen: set[str] = set()
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputDataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict) or "id" not in obj or "values" not in obj:
                raise InputDataError(f"{path}:{lineno}: expected keys 'id' and 'values'")
            sid = obj["id"]
            vals = obj["values"]
            if not isinstance(sid, str):
                raise InputDataError(f"{path}:{lineno}: 'id' must be a string")
            if sid in seen:
                raise InputDataError(f"{path}:{lineno}: duplicate series id {sid!r}")
            seen.add(sid)
            if not isinstance(vals, list) or any(
                    isinstance(v, bool) or not isinstance(v, (int, float)) for v in vals):
                raise InputDataError(f"{path}:{lineno}: 'values' must be a list of numbers")
            series.append((sid, np.asarray(vals, dtype=np.float64)))
    return _assemble(series, context_len, horizon_len, seasonality, str(path))


def load_dataset(path, context_len: int, horizon_len: int, seasonality: int = 1) -> Dataset:
    """Dispatch on file suffix: ``.jsonl`` loads JSON lines, anything else CSV."""
    if str(path).endswith(".jsonl"):
        return load_jsonl(path, context_len, horizon_len, seasonality)
    return load_csv(path, context_len, horizon_len, seasonality)


def _grouped_values(dataset: Dataset) -> list[tuple[str, np.ndarray]]:
    order: list[str] = []
    chunks: dict[str, list[np.ndarray]] = {}
    for w in dataset:
        if w.series_id not in chunks:
            order.append(w.series_id)
            chunks[w.series_id] = []
        chunks[w.series_id].append(np.concatenate([w.context, w.horizon]))
    return [(sid, np.concatenate(chunks[sid])) for sid in order]


def save_csv(dataset: Dataset, path) -> None:
    """Write a dataset back to the CSV format accepted by ``load_csv``.

    Windows of the same series are concatenated in order with a fresh
    running index, so reloading with the same window sizes reproduces
    the windows exactly.
    """
    write_series_csv(_grouped_values(dataset), path)


def save_jsonl(dataset: Dataset, path) -> None:
    write_series_jsonl(_grouped_values(dataset), path)


def write_series_csv(series: Sequence[tuple[str, np.ndarray]], path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for sid, values in series:
            for idx, value in enumerate(values):
                writer.writerow([sid, idx, _fmt(value)])


def write_series_jsonl(series: Sequence[tuple[str, np.ndarray]], path) -> None:
    with Path(path).open("w") as fh:
        for sid, values in series:
            fh.write(json.dumps({"id": sid, "values": [float(v) for v in values]}))
            fh.write("\n")


def _ar1(innovations: np.ndarray, coeff: float = AR1_COEFF) -> np.ndarray:
    # Stationary start: x_0 is the first innovation scaled to the
    # marginal standard deviation of the process.
    eps = innovations.copy()
    eps[0] /= math.sqrt(1.0 - coeff * coeff)
    return lfilter([1.0], [1.0, -coeff], eps)


def generate_series(kind: str, n_series: int, length: int, seed: int,
                    ) -> list[tuple[str, np.ndarray]]:
    """Generate raw synthetic series. Bit-identical for identical arguments.

    Kinds:
      gaussian_ar1:  x_t = 0.8 x_{t-1} + e_t with standard normal e_t.
      heavy_tailed:  same recursion with Student-t (3 dof) innovations.
      seasonal_sine: amplitude * sin(2 pi t / 24) + trend + N(0, 0.01) noise,
                     amplitude ~ U[0.5, 5], trend slope ~ U[-0.01, 0.01].
    """
    if kind not in SYNTHETIC_KINDS:
        raise ConfigurationError(
            f"kind must be one of {', '.join(SYNTHETIC_KINDS)}; got {kind!r}")
    n_series = check_int_at_least(n_series, 1, "n_series")
    length = check_int_at_least(length, 32, "length")
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n_series):
        if kind == "gaussian_ar1":
            values = _ar1(rng.standard_normal(length))
        elif kind == "heavy_tailed":
            values = _ar1(rng.standard_t(3, size=length))
        else:
            amplitude = rng.uniform(0.5, 5.0)
            slope = rng.uniform(-0.01, 0.01)
            t = np.arange(length, dtype=np.float64)
            noise = SINE_NOISE_STD * rng.standard_normal(length)
            values = amplitude * np.sin(2.0 * np.pi * t / SINE_PERIOD) + slope * t + noise
        out.append((f"{kind}-{k:04d}", values))
    return out


def generate_synthetic(kind: str, n_series: int, length: int, seed: int, *,
                       context_len: int | None = None, horizon_len: int | None = None,
                       seasonality: int = 1) -> Dataset:
    """Generate a windowed synthetic dataset.

    When window sizes are omitted, each series is split 3:1 into a
    single (context, horizon) window covering its full length.
    """
    if context_len is None and horizon_len is None:
        context_len = 3 * length // 4
        horizon_len = length - context_len
    elif context_len is None or horizon_len is None:
        raise ConfigurationError("context_len and horizon_len must be given together")
    series = generate_series(kind, n_series, length, seed)
    tag = f"synthetic:{kind}:n{n_series}:len{length}:seed{seed}"
    return _assemble(series, context_len, horizon_len, seasonality, tag)
