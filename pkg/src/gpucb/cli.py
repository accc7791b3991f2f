"""Command-line front end.

Exit status: 0 when every criterion of the suite passes, 1 when one fails,
2 for configuration errors (missing or invalid config, CSV schema mismatch).
``GPUCB_OUTPUT_DIR`` and ``GPUCB_THREADS`` override the output directory and
worker count; ``--out`` takes precedence over both.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import ConfigurationError, GPUCBError

SUBCOMMAND_KINDS = {
    "simulate": ("regret_scaling", "potential_audit"),
    "concentration": ("ville_coverage", "supermartingale_decay", "truncation_convergence", "ellipsoid_coverage"),
    "infogain": ("infogain_sandwich",),
    "identity": ("gram_identity", "potential_audit"),
    "compare-radii": ("radius_compare",),
}


def _common(p):
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--out", help="output directory (overrides config and GPUCB_OUTPUT_DIR)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry, e.g. --set seeds.count=100 (repeatable)")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpucb", description="GP-UCB verification suites")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, kinds in SUBCOMMAND_KINDS.items():
        _common(sub.add_parser(name, help=f"run one of: {', '.join(kinds)}"))
    p = sub.add_parser("validate-config", help="check a config without running it")
    p.add_argument("config", nargs="?")
    p.add_argument("--config", dest="config_flag")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--seed", type=int)
    p.add_argument("-v", "--verbose", action="count", default=0)
    p = sub.add_parser("plot", help="render a CSV artifact to SVG")
    p.add_argument("--kind", required=True, choices=("regret", "scaling", "coverage", "infogain"))
    p.add_argument("--csv", required=True, help="input CSV")
    p.add_argument("--out", help="output .svg path or directory (default: next to the CSV)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def _fail(msg, code):
    print(f"error: {msg}", file=sys.stderr)
    return code


def _run(args) -> int:
    from .experiments import load_config, run_suite

    cfg = load_config(args.config, args.overrides, args.seed)
    allowed = SUBCOMMAND_KINDS[args.command]
    if cfg.kind not in allowed:
        raise ConfigurationError(f"{args.command} runs {', '.join(allowed)} suites, config has kind {cfg.kind!r}")
    threads = os.environ.get("GPUCB_THREADS")
    if threads:
        try:
            cfg = cfg.model_copy(update={"workers": max(1, int(threads))})
        except ValueError as exc:
            raise ConfigurationError(f"GPUCB_THREADS must be an integer, got {threads!r}") from exc
    report = run_suite(cfg, args.out)
    print(report.summary_line())
    if not report.passed:
        for name in report.failures:
            print(f"failed criterion: {name}", file=sys.stderr)
        return 1
    return 0


def _validate(args) -> int:
    from .experiments import load_config

    path = args.config or args.config_flag
    if path is None:
        raise ConfigurationError("validate-config needs a config path")
    cfg = load_config(path, args.overrides, args.seed)
    print(f"{path}: valid {cfg.kind} config (sha256 {cfg.digest()[:12]})")
    return 0


def _plot(args) -> int:
    from .plotting import plot_csv

    src = Path(args.csv)
    if args.out is None:
        dst = src.with_suffix(".svg")
    elif args.out.endswith(".svg"):
        dst = Path(args.out)
    else:
        dst = Path(args.out) / (src.stem + ".svg")
    plot_csv(args.kind, src, dst)
    print(f"wrote {dst}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate-config":
            return _validate(args)
        if args.command == "plot":
            return _plot(args)
        return _run(args)
    except ConfigurationError as exc:
        return _fail(str(exc), 2)
    except GPUCBError as exc:
        return _fail(str(exc), 1)


if __name__ == "__main__":
    sys.exit(main())
