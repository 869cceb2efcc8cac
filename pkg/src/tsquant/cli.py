"""Command line interface.

Exit codes: 0 success, 1 input or I/O error, 2 configuration error,
3 internal invariant violation. Options can also be supplied through a
JSON file (--config) whose keys mirror the long option names with
underscores; explicit flags take precedence. Commands that write into
a directory echo the effective configuration to resolved_config.json.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import traceback
from collections import defaultdict
from pathlib import Path

import numpy as np

from . import __version__
from .data import (SYNTHETIC_KINDS, generate_series, load_dataset,
                   write_series_csv, write_series_jsonl)
from .errors import ConfigurationError, InputDataError, TsquantError
from .oracle import WidthSearchSpec, oracle_evaluate, tune_width
from .quantizer import BINNING_SCHEMES, BinLayout, dequantize, quantize
from .scaling import SCALING_SCHEMES, AffineScaler
from .sweep import (SCHEMA_VERSION, correlation_table, load_report,
                    pooled_utilization, run_sweep, write_correlations_csv,
                    write_report)
from .tokenizer import DEFAULT_WIDTHS, TokenizerConfig
from .validation import check_choice

_REQUIRED = object()


def _resolve(args: argparse.Namespace, spec: dict) -> dict:
    """Merge flags over config-file values over defaults."""
    file_values = {}
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            with open(config_path) as fh:
                file_values = json.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config file {config_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{config_path}: invalid JSON: {exc}") from exc
        if not isinstance(file_values, dict):
            raise ConfigurationError(f"{config_path}: config file must hold a JSON object")
        unknown = set(file_values) - set(spec)
        if unknown:
            raise ConfigurationError(
                f"{config_path}: unknown config key(s): {', '.join(sorted(unknown))}")
    out = {}
    for key, default in spec.items():
        value = getattr(args, key, None)
        if value is None:
            value = file_values.get(key, default)
        if value is _REQUIRED:
            raise ConfigurationError(f"missing required option --{key.replace('_', '-')}")
        out[key] = value
    return out


def _dump_json(obj, path) -> None:
    with Path(path).open("w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _write_resolved(opts: dict, command: str, output_dir: Path) -> None:
    payload = {"command": command, "schema_version": SCHEMA_VERSION}
    for key, value in opts.items():
        payload[key] = str(value) if isinstance(value, Path) else value
    _dump_json(dict(sorted(payload.items())), output_dir / "resolved_config.json")


def _write_trace_csv(trace, path) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        fh.write("width,mean_mase\n")
        for width, mean_mase in trace:
            fh.write(f"{format(width, '.17g')},{format(mean_mase, '.17g')}\n")


_WINDOW_SPEC = {"input": _REQUIRED, "context_len": _REQUIRED,
                "horizon_len": _REQUIRED, "seasonality": 1}

_TOKENIZER_SPEC = {"scaling": "mean", "binning": "uniform", "bins": 512,
                   "width": None, "center_offset": None}

_SEARCH_SPEC = {"w_lo": None, "w_hi": None, "grid_points": None, "budget": None}


def _load_windows(opts):
    return load_dataset(opts["input"], opts["context_len"], opts["horizon_len"],
                        opts["seasonality"])


def _tokenizer_config(opts, *, use_default_width=False) -> TokenizerConfig:
    scaling = check_choice(opts["scaling"], SCALING_SCHEMES, "scaling")
    width = opts["width"]
    if width is None and use_default_width:
        width = DEFAULT_WIDTHS[scaling]
    if width is None:
        raise ConfigurationError("missing required option --width")
    return TokenizerConfig(scaling=scaling, binning=opts["binning"],
                           n_bins=opts["bins"], width=width,
                           center_offset=opts["center_offset"])


def _search_spec(opts) -> WidthSearchSpec:
    defaults = WidthSearchSpec()
    return WidthSearchSpec(
        w_lo=defaults.w_lo if opts["w_lo"] is None else opts["w_lo"],
        w_hi=defaults.w_hi if opts["w_hi"] is None else opts["w_hi"],
        grid_points=defaults.grid_points if opts["grid_points"] is None else opts["grid_points"],
        budget=defaults.budget if opts["budget"] is None else opts["budget"],
    )


def _scheme_list(value, name) -> list:
    if isinstance(value, str):
        value = [v.strip() for v in value.split(",") if v.strip()]
    if not isinstance(value, list) or not value:
        raise ConfigurationError(f"{name} must be a non-empty list")
    return value


def _vocab_list(value) -> list:
    if isinstance(value, str):
        value = [v.strip() for v in value.split(",") if v.strip()]
    try:
        return [int(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid vocabulary sizes: {value!r}") from exc


def cmd_tokenize(args) -> int:
    opts = _resolve(args, {**_WINDOW_SPEC, **_TOKENIZER_SPEC, "output": _REQUIRED})
    config = _tokenizer_config(opts, use_default_width=True)
    layout = config.build_layout()
    dataset = _load_windows(opts)
    window_counter: dict = defaultdict(int)
    with Path(opts["output"]).open("w") as fh:
        fh.write(json.dumps({"schema_version": SCHEMA_VERSION,
                             "config": config.to_dict(),
                             "layout": layout.to_dict()}) + "\n")
        for window in dataset:
            index = window_counter[window.series_id]
            window_counter[window.series_id] += 1
            scaler = AffineScaler(config.scaling).fit(window.context)
            values = np.concatenate([window.context, window.horizon])
            seq = quantize(layout, scaler.transform(values))
            fh.write(json.dumps({
                "series_id": window.series_id,
                "window_index": index,
                "tokens": [int(t) for t in seq.tokens],
                "scaler": scaler.to_dict(),
                "clipped_low": seq.clipped_low,
                "clipped_high": seq.clipped_high,
            }) + "\n")
    return 0


def cmd_detokenize(args) -> int:
    opts = _resolve(args, {"input": _REQUIRED, "output": _REQUIRED})
    in_path = Path(opts["input"])
    try:
        lines = in_path.read_text().splitlines()
    except OSError as exc:
        raise InputDataError(f"cannot read {in_path}: {exc}") from exc
    if not lines:
        raise InputDataError(f"{in_path}: empty token file")
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise InputDataError(f"{in_path}:1: invalid JSON: {exc}") from exc
    if not isinstance(head, dict) or "layout" not in head:
        raise InputDataError(f"{in_path}: first line must carry the bin layout")
    layout = BinLayout.from_dict(head["layout"])
    with Path(opts["output"]).open("w") as fh:
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputDataError(f"{in_path}:{lineno}: invalid JSON: {exc}") from exc
            try:
                scaler = AffineScaler.from_dict(row["scaler"])
                values = scaler.inverse_transform(dequantize(layout, row["tokens"]))
                out = {"series_id": row["series_id"],
                       "window_index": row["window_index"],
                       "values": [float(v) for v in values]}
            except (KeyError, TypeError) as exc:
                raise InputDataError(f"{in_path}:{lineno}: malformed row: {exc}") from exc
            fh.write(json.dumps(out) + "\n")
    return 0


def cmd_bound(args) -> int:
    opts = _resolve(args, {**_WINDOW_SPEC, **_TOKENIZER_SPEC, **_SEARCH_SPEC,
                           "tune": False, "output": _REQUIRED, "trace": None})
    dataset = _load_windows(opts)
    if opts["tune"]:
        tuned = tune_width(opts["scaling"], opts["binning"], opts["bins"], dataset,
                           _search_spec(opts), center_offset=opts["center_offset"])
        result = tuned.result
        if opts["trace"]:
            _write_trace_csv(tuned.trace, opts["trace"])
    else:
        config = _tokenizer_config(opts)
        result = oracle_evaluate(config, dataset)
    _dump_json({"schema_version": SCHEMA_VERSION, **result.to_dict()}, opts["output"])
    return 0


def cmd_tune(args) -> int:
    opts = _resolve(args, {**_WINDOW_SPEC,
                           "scaling": "mean", "binning": "uniform", "bins": 512,
                           "center_offset": None, **_SEARCH_SPEC,
                           "output_dir": _REQUIRED})
    dataset = _load_windows(opts)
    tuned = tune_width(opts["scaling"], opts["binning"], opts["bins"], dataset,
                       _search_spec(opts), center_offset=opts["center_offset"])
    out = Path(opts["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    _dump_json({"schema_version": SCHEMA_VERSION, "width": tuned.width,
                "result": tuned.result.to_dict()}, out / "tune_result.json")
    _write_trace_csv(tuned.trace, out / "trace.csv")
    _write_resolved(opts, "tune", out)
    return 0


def cmd_sweep(args) -> int:
    opts = _resolve(args, {**_WINDOW_SPEC,
                           "scalings": ",".join(SCALING_SCHEMES),
                           "binnings": ",".join(BINNING_SCHEMES),
                           "vocab": "512,1024,4096",
                           "tune": False, "width": None, **_SEARCH_SPEC,
                           "seed": 0, "output_dir": _REQUIRED})
    scalings = _scheme_list(opts["scalings"], "scalings")
    binnings = _scheme_list(opts["binnings"], "binnings")
    vocabs = _vocab_list(opts["vocab"])
    dataset = _load_windows(opts)
    report = run_sweep(dataset, scalings, binnings, vocabs, tune=bool(opts["tune"]),
                       width=opts["width"], search=_search_spec(opts),
                       seed=opts["seed"])
    out = Path(opts["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    write_report(report, out)
    _write_resolved(opts, "sweep", out)
    return 0


def cmd_utilization(args) -> int:
    opts = _resolve(args, {**_WINDOW_SPEC, **_TOKENIZER_SPEC,
                           "output_dir": _REQUIRED})
    config = _tokenizer_config(opts, use_default_width=True)
    dataset = _load_windows(opts)
    stats = pooled_utilization(config, dataset)
    out = Path(opts["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    _dump_json({"schema_version": SCHEMA_VERSION, "config": config.to_dict(),
                **stats.to_dict()}, out / "utilization.json")
    with (out / "histogram.csv").open("w", newline="") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        fh.write("token,count\n")
        for i, count in enumerate(stats.counts):
            fh.write(f"{i + 1},{count}\n")
    _write_resolved(opts, "utilization", out)
    return 0


def cmd_correlate(args) -> int:
    opts = _resolve(args, {"report": _REQUIRED, "output": _REQUIRED})
    report = load_report(opts["report"])
    rows = correlation_table(report)
    write_correlations_csv(rows, opts["output"])
    return 0


def cmd_synth(args) -> int:
    opts = _resolve(args, {"kind": _REQUIRED, "n_series": _REQUIRED,
                           "length": _REQUIRED, "seed": 0, "output": _REQUIRED})
    series = generate_series(opts["kind"], opts["n_series"], opts["length"],
                             opts["seed"])
    if str(opts["output"]).endswith(".jsonl"):
        write_series_jsonl(series, opts["output"])
    else:
        write_series_csv(series, opts["output"])
    return 0


def _add_window_options(parser) -> None:
    parser.add_argument("--input", help="dataset file (CSV, or JSONL by suffix)")
    parser.add_argument("--context-len", dest="context_len", type=int)
    parser.add_argument("--horizon-len", dest="horizon_len", type=int)
    parser.add_argument("--seasonality", type=int)


def _add_tokenizer_options(parser, with_width: bool = True) -> None:
    parser.add_argument("--scaling", choices=SCALING_SCHEMES)
    parser.add_argument("--binning", choices=BINNING_SCHEMES)
    parser.add_argument("--bins", type=int, help="vocabulary size B")
    if with_width:
        parser.add_argument("--width", type=float)
    parser.add_argument("--center-offset", dest="center_offset", type=float)


def _add_search_options(parser) -> None:
    parser.add_argument("--w-lo", dest="w_lo", type=float)
    parser.add_argument("--w-hi", dest="w_hi", type=float)
    parser.add_argument("--grid-points", dest="grid_points", type=int)
    parser.add_argument("--budget", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsquant",
        description="Scale-then-quantize tokenization of time series, "
                    "oracle error bounds, and token-space analytics.")
    parser.add_argument("--version", action="version", version=f"tsquant {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file with option values")
        p.set_defaults(handler=handler)
        return p

    p = command("tokenize", cmd_tokenize, "tokenize windows into JSONL")
    _add_window_options(p)
    _add_tokenizer_options(p)
    p.add_argument("--output", help="output JSONL path")

    p = command("detokenize", cmd_detokenize, "reconstruct values from tokens")
    p.add_argument("--input", help="JSONL produced by tokenize")
    p.add_argument("--output", help="output JSONL path")

    p = command("bound", cmd_bound, "oracle error bound for one configuration")
    _add_window_options(p)
    _add_tokenizer_options(p)
    p.add_argument("--tune", action=argparse.BooleanOptionalAction,
                   help="tune the width instead of using --width")
    _add_search_options(p)
    p.add_argument("--output", help="output JSON path")
    p.add_argument("--trace", help="optional search trace CSV path")

    p = command("tune", cmd_tune, "tune the bin width for one configuration")
    _add_window_options(p)
    _add_tokenizer_options(p, with_width=False)
    _add_search_options(p)
    p.add_argument("--output-dir", dest="output_dir")

    p = command("sweep", cmd_sweep, "evaluate a grid of configurations")
    _add_window_options(p)
    p.add_argument("--scalings", help="comma separated scaling schemes")
    p.add_argument("--binnings", help="comma separated binning schemes")
    p.add_argument("--vocab", help="comma separated vocabulary sizes")
    p.add_argument("--tune", action=argparse.BooleanOptionalAction,
                   help="tune the width per cell")
    p.add_argument("--width", type=float, help="fixed width for every cell")
    _add_search_options(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--output-dir", dest="output_dir")

    p = command("utilization", cmd_utilization, "token usage statistics")
    _add_window_options(p)
    _add_tokenizer_options(p)
    p.add_argument("--output-dir", dest="output_dir")

    p = command("correlate", cmd_correlate, "correlations from a sweep report")
    p.add_argument("--report", help="sweep_report.json path")
    p.add_argument("--output", help="output CSV path")

    p = command("synth", cmd_synth, "generate a synthetic dataset")
    p.add_argument("--kind", choices=SYNTHETIC_KINDS)
    p.add_argument("--n-series", dest="n_series", type=int)
    p.add_argument("--length", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help="output CSV or JSONL path")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.handler(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InputDataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TsquantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    except Exception:
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
