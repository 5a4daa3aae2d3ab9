"""Command line driver: ``twistlab <experiment> [--config FILE] [--seed N] [--out DIR] [--format json|csv]``.

Exit codes: 0 every check passed, 1 a check failed, 2 invalid input,
3 a capacity limit was hit (partial report written), 4 unwritable output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import TwistlabError, UnwritablePathError
from .reports import ENVELOPE, EXPERIMENTS, emit, run

EXIT_OK, EXIT_FAILED, EXIT_SCHEMA, EXIT_CAPACITY, EXIT_UNWRITABLE = 0, 1, 2, 3, 4


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twistlab", description="Twisted group algebra experiments.")
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", type=Path, help="JSON configuration file")
    ap.add_argument("--seed", type=int, help="master seed (overrides the config)")
    ap.add_argument("--out", type=Path, help="output directory (default: config 'output' or '.')")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                    help="set a parameter, value parsed as JSON (repeatable)")
    ap.add_argument("--quiet", action="store_true", help="do not print the check summary")
    return ap


def _load_config(args) -> dict:
    cfg: dict = {}
    if args.config is not None:
        try:
            cfg = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise TwistlabError(f"cannot read config: {exc}") from exc
        if not isinstance(cfg, dict):
            raise TwistlabError("config must be a JSON object")
    if cfg.get("experiment", args.experiment) != args.experiment:
        raise TwistlabError(f"config is for experiment {cfg['experiment']!r}, not {args.experiment!r}")
    cfg["experiment"] = args.experiment
    for item in args.set:
        key, _, val = item.partition("=")
        try:
            value = json.loads(val)
        except json.JSONDecodeError:
            value = val
        if key in ENVELOPE:
            cfg[key] = value
        else:
            cfg.setdefault("params", {})[key] = value
    if args.seed is not None:
        cfg["seed"] = args.seed
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        report = run(cfg)
    except TwistlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    out = args.out if args.out is not None else Path(report.config.get("output", "."))
    try:
        paths = emit(report, out, args.format)
    except UnwritablePathError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE
    if not args.quiet:
        for name in sorted(report.checks):
            print(f"{'PASS' if report.checks[name]['passed'] else 'FAIL'}  {name}")
        for p in paths:
            print(f"wrote {p}")
    if report.status == "capacity":
        return EXIT_CAPACITY
    return EXIT_OK if report.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
