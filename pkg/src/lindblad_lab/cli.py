"""Command-line scenario runner.

::

    lindblad-lab run CONFIG.json [--out DIR] [--strict] [--format csv|json]
    lindblad-lab verify CONFIG.json [--out DIR] [--format csv|json]

``CONFIG`` may also be ``preset:NAME`` for a packaged preset. The
environment variable ``LINDBLAD_LAB_OUT`` takes precedence over ``--out``.

Exit codes: 0 success, 1 a verify check failed, 2 malformed config,
3 model constraint violated under ``--strict``, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, LindbladLabError
from .scenarios import Table, load_preset, run_scenario, verify_scenario

__all__ = ["main", "format_value", "write_table", "dumps"]

EXIT_OK, EXIT_CHECK_FAILED, EXIT_SCHEMA, EXIT_CONSTRAINT, EXIT_NUMERICAL = 0, 1, 2, 3, 4
ENV_OUT = "LINDBLAD_LAB_OUT"


def format_value(x) -> str:
    """17 significant digits, so every double round-trips."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def _json_ready(obj):
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, fixed indentation, NaN written as null."""
    return json.dumps(_json_ready(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_table(table: Table, path: Path, fmt: str) -> list[Path]:
    """Write one artifact; CSV gets a sidecar JSON header when it has metadata."""
    written = []
    if fmt == "csv":
        with open(path.with_suffix(".csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(table.columns)
            for row in table.rows:
                w.writerow([format_value(v) for v in row])
        written.append(path.with_suffix(".csv"))
        if table.header:
            side = path.with_name(path.name + "_header.json")
            side.write_text(dumps(table.header))
            written.append(side)
    else:
        doc = {"columns": list(table.columns), "rows": table.rows.tolist(), "header": table.header}
        path.with_suffix(".json").write_text(dumps(doc))
        written.append(path.with_suffix(".json"))
    return written


def _load_config(arg: str) -> dict:
    if arg.startswith("preset:"):
        return load_preset(arg.split(":", 1)[1])
    try:
        text = Path(arg).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from None


def _out_dir(args) -> Path:
    out = Path(os.environ.get(ENV_OUT) or args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_run(args) -> int:
    result = run_scenario(_load_config(args.config))
    for v in result.violations:
        print(f"constraint: {v}", file=sys.stderr)
    if result.violations and args.strict:
        return EXIT_CONSTRAINT
    for name, table in result.artifacts.items():
        if not table.allow_nonfinite and not np.all(np.isfinite(table.rows)):
            print(f"numerical failure: non-finite values in {name}", file=sys.stderr)
            return EXIT_NUMERICAL
    out = _out_dir(args)
    for name, table in sorted(result.artifacts.items()):
        for p in write_table(table, out / f"{result.name}_{name}", args.format):
            print(p)
    return EXIT_OK


def _cmd_verify(args) -> int:
    report = verify_scenario(_load_config(args.config))
    text = dumps(report)
    out = _out_dir(args)
    if args.format == "json":
        path = out / f"{report['name']}_verify.json"
        path.write_text(text)
    else:
        cols = ("metric", "max_deviation", "tolerance", "passed")
        path = out / f"{report['name']}_verify.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(cols)
            for m in report["metrics"]:
                w.writerow([m["metric"], format_value(m["max_deviation"]), format_value(m["tolerance"]), str(m["passed"]).lower()])
    sys.stdout.write(text)
    return EXIT_OK if report["passed"] else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lindblad-lab", description="Damped open-system scenarios and cross-checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "evaluate a scenario and write its artifacts"),
                        ("verify", "run an analytic-versus-oracle cross-check")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="scenario JSON file, or preset:NAME")
        p.add_argument("--out", default=".", help=f"output directory (overridden by ${ENV_OUT})")
        p.add_argument("--strict", action="store_true", help="exit 3 on model constraint violations")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SCHEMA if exc.code else EXIT_OK
    handler = _cmd_run if args.command == "run" else _cmd_verify
    try:
        return handler(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (LindbladLabError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
