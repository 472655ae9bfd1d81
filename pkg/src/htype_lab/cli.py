"""Command line driver: one subcommand per verification experiment.

Exit codes: 0 all checks passed, 1 checks ran and failed (CSV still
written), 2 configuration or runtime error.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .config import ConfigError, parse_config
from .experiments import EXPERIMENTS, ExperimentResult


def format_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def render_csv(result: ExperimentResult, subcommand: str, echo: list[str]) -> str:
    buf = io.StringIO()
    ncol = len(result.header)
    buf.write(",".join(result.header) + "\n")
    for row in result.rows:
        if len(row) != ncol:
            raise ValueError("row length does not match header")
        buf.write(",".join(format_number(v) for v in row) + "\n")
    buf.write(f"# experiment = {subcommand}\n")
    for line in echo:
        buf.write(f"# {line}\n")
    for k, v in result.summary.items():
        buf.write(f"# {k} = {format_number(v) if not isinstance(v, str) else v}\n")
    buf.write(f"# passed = {int(result.passed)}\n")
    buf.write(f"# htype_lab = {__version__}, numpy = {np.__version__}\n")
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="htype-lab", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", help=", ".join(EXPERIMENTS))
    ap.add_argument("--config", help="config file (key = value lines in [group]/[run]/[tolerances])")
    ap.add_argument("--out", help="CSV output path (default: <subcommand>.csv or [run] out)")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config key (repeatable)")
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                    help="worker threads for independent table rows (does not change output)")
    return ap


def run(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.subcommand not in EXPERIMENTS:
        print(f"unknown subcommand {args.subcommand!r}; choose from {', '.join(EXPERIMENTS)}", file=sys.stderr)
        return 2
    try:
        text = ""
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        cfg = parse_config(text, args.set)
    except (OSError, ConfigError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    if args.threads < 1:
        print("--threads must be >= 1", file=sys.stderr)
        return 2
    out = args.out or cfg.out or f"{args.subcommand}.csv"
    try:
        # BLAS stays single-threaded so that reductions do not depend on --threads
        with threadpool_limits(limits=1), ThreadPoolExecutor(max_workers=args.threads) as pool:
            result = EXPERIMENTS[args.subcommand](cfg, map_fn=pool.map)
        text = render_csv(result, args.subcommand, cfg.echo())
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except Exception as exc:  # numeric non-convergence and friends
        print(f"{args.subcommand} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    status = "PASS" if result.passed else "FAIL"
    print(f"{args.subcommand}: {status} -> {out}")
    return 0 if result.passed else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
