"""Batch experiment front end.

Subcommands drive the sweep layer from a config file and emit flat tables:

    binterf overlap --config exp.ini [--out table.csv] [--format csv|jsonl]
    binterf sensitivity --config exp.ini
    binterf roc --config exp.ini
    binterf photocurrent --config exp.ini
    binterf fit --in table.csv --x n_mean --y magnitude_min

Exit codes: 0 success, 1 configuration error, 2 when one or more rows failed
(the table is still written, failed rows carry their error message).
Relative output paths resolve against $BINTERF_OUT_DIR when it is set.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .config import CutoffPolicy, load_config
from .errors import ConfigError
from .sweeps import (FitResult, Table, fit_scaling, read_rows, run_overlap,
                     run_photocurrent, run_roc, run_sensitivity, write_csv,
                     write_jsonl)

OUT_DIR_ENV = "BINTERF_OUT_DIR"

_RUNNERS = {
    "overlap": run_overlap,
    "sensitivity": run_sensitivity,
    "roc": run_roc,
    "photocurrent": run_photocurrent,
}


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", required=True, help="experiment config file")
    sub.add_argument("--out", help="output path (default: config [output] path, else stdout)")
    sub.add_argument("--format", choices=("csv", "jsonl"),
                     help="output format (default: config [output] format)")
    sub.add_argument("--threads", type=int, default=1,
                     help="worker threads; output is identical for any value")
    sub.add_argument("--cutoff", help="override cutoff policy: 'auto' or a dimension")
    sub.add_argument("--seed", type=int,
                     help="reserved; current computations are deterministic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="binterf",
        description="entanglement-assisted binary interferometry sweeps")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("overlap", "closed-form vs oracle overlaps over a grid"),
            ("sensitivity", "minimum detectable magnitudes per probe energy"),
            ("roc", "Helstrom vs analytic detection curves"),
            ("photocurrent", "zero-difference-count probabilities")):
        _add_common(subs.add_parser(name, help=help_text))
    fit = subs.add_parser("fit", help="log-log power-law fit of an emitted table")
    fit.add_argument("--in", dest="table", required=True, help="CSV or JSONL table")
    fit.add_argument("--x", required=True, help="abscissa column name")
    fit.add_argument("--y", required=True, help="ordinate column name")
    fit.add_argument("--out", help="output path (default stdout)")
    fit.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    return parser


def _cutoff_override(raw: str) -> CutoffPolicy:
    if raw.strip().lower() == "auto":
        return CutoffPolicy("auto", None)
    try:
        dim = int(raw)
    except ValueError:
        raise ConfigError(f"--cutoff: expected 'auto' or an integer, got {raw!r}") from None
    if dim < 2:
        raise ConfigError(f"--cutoff: dimension must be >= 2, got {dim}")
    return CutoffPolicy("fixed", dim)


def _resolve_out(path: str | None) -> str | None:
    if path is None:
        return None
    base = os.environ.get(OUT_DIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _emit(table: Table, path: str | None, fmt: str) -> None:
    writer = write_csv if fmt == "csv" else write_jsonl
    if path is None:
        writer(table, sys.stdout)
        return
    resolved = _resolve_out(path)
    os.makedirs(os.path.dirname(resolved) or ".", exist_ok=True)
    with open(resolved, "w", newline="") as fh:
        writer(table, fh)


def _run_fit(args: argparse.Namespace) -> int:
    try:
        rows = [r for r in read_rows(args.table) if not r.get("error")]
        fit: FitResult = fit_scaling(rows, args.x, args.y)
    except (OSError, ValueError) as exc:
        print(f"binterf fit: {exc}", file=sys.stderr)
        return 1
    table = Table(
        ("x_col", "y_col", "n_rows", "slope", "intercept", "stderr"),
        ({"x_col": args.x, "y_col": args.y, "n_rows": len(rows),
          "slope": fit.slope, "intercept": fit.intercept, "stderr": fit.stderr},))
    _emit(table, args.out, args.format)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "fit":
        return _run_fit(args)
    try:
        cfg = load_config(args.config)
        if args.cutoff:
            cfg = dataclasses.replace(cfg, cutoff=_cutoff_override(args.cutoff))
        if args.threads < 1:
            raise ConfigError(f"--threads: must be >= 1, got {args.threads}")
        table = _RUNNERS[args.command](cfg, threads=args.threads)
    except ConfigError as exc:
        print(f"binterf {args.command}: {exc}", file=sys.stderr)
        return 1
    fmt = args.format or cfg.output.format
    _emit(table, args.out or cfg.output.path, fmt)
    if any(row["error"] for row in table.rows):
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
