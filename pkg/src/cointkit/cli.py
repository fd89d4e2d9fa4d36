"""Command-line entry point: config-driven pipeline runs and data tooling.

Every subcommand reads one declarative config file. ``run`` executes the
whole pipeline; the per-stage subcommands stop after their stage so partial
results can be inspected cheaply. ``fetch`` pulls the source indicators into
the local cache and writes them as a raw CSV; ``freeze`` rewrites the
configured dataset as the canonical 6-decimal replication CSV with its
checksum manifest.

Exit codes: 0 success, 2 config error, 3 data error, 4 stage failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

from .config import load_config
from .errors import (
    CointkitError,
    ConfigError,
    EmptyOverlap,
    EmptyResponse,
    GapError,
    HttpError,
    IoError,
    SchemaMismatch,
)
from .ingest import (
    WDI_COUNTRIES,
    WDI_GDP_INDICATOR,
    WDI_INDICATORS,
    IndicatorRequest,
    fetch_many,
    freeze_replication,
    load_csv,
)
from .pipeline import emit_report, run_pipeline

#: Subcommand -> last pipeline stage it runs (None = the whole pipeline).
STAGE_FOR_COMMAND = {
    "indices": "indices",
    "unitroot": "unitroots",
    "breaks": "breaks",
    "bounds": "cointegration",
    "estimate": "longrun",
    "dols": "dols",
    "ecm": "ecm",
    "diagnose": "diagnostics",
    "causality": "causality",
    "forecast": "forecasts",
    "scenarios": "forecasts",
    "run": None,
}

#: Subcommand -> plot-ready CSV written when --out names a .csv file.
_CSV_TABLE_FOR_COMMAND = {
    "indices": ("indices", "paths"),
    "forecast": ("forecasts", "forecast_paths"),
    "scenarios": ("forecasts", "forecast_paths"),
}

_DATA_ERRORS = (
    IoError,
    SchemaMismatch,  # covers ParseError
    GapError,
    EmptyOverlap,
    HttpError,
    EmptyResponse,
)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cointkit",
        description="Small-sample cointegration and forecasting pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = ("fetch", "freeze", *STAGE_FOR_COMMAND)
    help_for = {
        "fetch": "fetch source indicators into the cache and a raw CSV",
        "freeze": "write the canonical replication CSV and manifest",
        "indices": "build the demand and monetary-conditions indices",
        "unitroot": "run the unit-root battery and integration classing",
        "breaks": "run the structural-break scan",
        "bounds": "run the cointegration tests",
        "estimate": "fit the long-run equation with robust inference",
        "dols": "fit the dynamic OLS check",
        "ecm": "fit the error-correction model",
        "diagnose": "run residual diagnostics and stability tests",
        "causality": "run pairwise causality tests",
        "forecast": "run holdout evaluation and forecasts",
        "scenarios": "run scenario forecasts",
        "run": "run the full pipeline",
    }
    for cmd in dict.fromkeys(commands):
        p = sub.add_parser(cmd, help=help_for[cmd])
        p.add_argument("--config", required=True, help="path to the config file")
        p.add_argument(
            "--out",
            help="output directory (stage commands) or file (fetch/freeze, "
            "or a .csv path for indices/forecast/scenarios)",
        )
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument(
            "--format",
            choices=("csv", "json", "text"),
            help="emit only this report format (default: all three)",
        )
    return parser


def _apply_overrides(cfg, args):
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None and not args.out.endswith(".csv"):
        cfg = replace(cfg, out_dir=args.out)
    return cfg


def _write_raw_csv(path: Path, names, series_list) -> None:
    years = series_list[0].years
    lines = ["year," + ",".join(names)]
    for i, yr in enumerate(years):
        cells = []
        for s in series_list:
            v = float(s.values[i])
            cells.append("" if math.isnan(v) else f"{v:.6f}")
        lines.append(f"{int(yr)}," + ",".join(cells))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _cmd_fetch(cfg, args) -> int:
    if cfg.fetch_year_range is None:
        raise ConfigError("data.fetch.years: required for the fetch command")
    y0, y1 = cfg.fetch_year_range
    requests, names = [], []
    for _, iso3 in WDI_COUNTRIES:
        requests.append(IndicatorRequest(iso3, WDI_GDP_INDICATOR, (y0, y1)))
        names.append(f"gdp_{iso3.lower()}")
    for key, code in WDI_INDICATORS.items():
        requests.append(IndicatorRequest("NPL", code, (y0, y1)))
        names.append(key)
    series_list = fetch_many(requests, cache_dir=cfg.fetch_cache_dir)
    out = Path(args.out) if args.out else Path(cfg.out_dir) / "raw_fetch.csv"
    _write_raw_csv(out, names, series_list)
    print(f"fetched {len(series_list)} series ({y0}-{y1}) -> {out}")
    return 0


def _cmd_freeze(cfg, args) -> int:
    ds = load_csv(cfg.data_csv, expected_columns=cfg.columns)
    out = Path(args.out) if args.out else Path(cfg.out_dir) / "replication.csv"
    manifest = freeze_replication(ds, out, sources={"csv": cfg.data_csv})
    print(f"froze {len(cfg.columns)} columns -> {out}")
    print(f"dataset_sha256: {manifest.dataset_checksum}")
    return 0


def _cmd_stage(cfg, args) -> int:
    through = STAGE_FOR_COMMAND[args.command]
    formats = (args.format,) if args.format else ("csv", "json", "text")
    report = run_pipeline(cfg, through=through)

    csv_out = None
    if args.out is not None and args.out.endswith(".csv"):
        key = _CSV_TABLE_FOR_COMMAND.get(args.command)
        if key is None:
            raise ConfigError(
                f"--out {args.out}: the {args.command} command writes a "
                "report directory, not a single CSV"
            )
        csv_out = Path(args.out)

    out_dir = Path(cfg.out_dir)
    written = emit_report(report, out_dir, formats=formats)
    for rec in report.stages:
        line = f"{rec.name:14s} {rec.status}"
        if rec.reason:
            line += f" ({rec.reason})"
        print(line)
    print(f"wrote {len(written)} files -> {out_dir}")

    if csv_out is not None:
        stage, _ = _CSV_TABLE_FOR_COMMAND[args.command]
        plot_name = "indices.csv" if args.command == "indices" else "forecast_paths.csv"
        src = out_dir / plot_name
        if not src.exists():
            raise IoError(
                f"{plot_name} was not produced (stage {stage!r} "
                f"{report.stage(stage).status})"
            )
        csv_out.parent.mkdir(parents=True, exist_ok=True)
        csv_out.write_bytes(src.read_bytes())
        print(f"copied {plot_name} -> {csv_out}")

    terminal = report.stages[-1] if through is None else report.stage(through)
    if through is None:
        failed = [r.name for r in report.stages if r.status == "failed"]
        if failed:
            print(f"failed stages: {', '.join(failed)}", file=sys.stderr)
            return 4
    elif terminal.status == "failed":
        print(f"stage {terminal.name} failed: {terminal.reason}", file=sys.stderr)
        return 4
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
        if args.command == "fetch":
            return _cmd_fetch(cfg, args)
        if args.command == "freeze":
            return _cmd_freeze(cfg, args)
        return _cmd_stage(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except CointkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
