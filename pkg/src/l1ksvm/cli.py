"""Command-line interface: prepare, synth, run, cv, report, plot.

Exit codes: 0 success, 1 usage/config error, 2 runtime failure. Sweep
subcommands write records.csv, summary.csv, the rendered figures and a
resolved config.json snapshot under a timestamped run directory (or an
explicit ``--out``).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from .config import ConfigError, load_config, write_snapshot
from .dataio import (
    DataError,
    balance_classes,
    filter_features,
    load_expression_table,
    write_expression_table,
)
from .harness import (
    aggregate_records,
    read_records_csv,
    read_summary_csv,
    run_bootstrap_experiment,
    run_cross_validation,
    write_records_csv,
    write_summary_csv,
)
from .plots import render_plots
from .synthbench import BenchmarkSpec, generate_benchmark

log = logging.getLogger(__name__)

WORKERS_ENV = "L1KSVM_WORKERS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want exit 1
        raise UsageError(message)


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _build_parser() -> _Parser:
    parser = _Parser(prog="l1ksvm", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", parser_class=_Parser,
                       help="filter and class-balance a raw expression table")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "tsv"], default=None)
    p.add_argument("--label-col", default="label")
    p.add_argument("--id-col", default="sample_id")
    p.add_argument("--prefix", default="hsa-",
                   help="required feature-name prefix (default: hsa-)")
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("synth", parser_class=_Parser,
                       help="generate the synthetic benchmark dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--per-class", type=int, default=500)
    p.add_argument("--features", type=int, default=1184)
    p.add_argument("--informative", type=int, default=30)
    p.add_argument("--effect", type=float, default=1.5)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)

    for name, help_text in (
        ("run", "bootstrap train/test sweep from a config"),
        ("cv", "cross-validation sweep from a config"),
    ):
        p = sub.add_parser(name, parser_class=_Parser, help=help_text)
        p.add_argument("--config", required=True)
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a top-level config key")
        p.add_argument("--out", default=None,
                       help="exact output directory (default: timestamped under config output)")
        p.add_argument("--workers", type=int, default=None,
                       help=f"worker processes (default: ${WORKERS_ENV} or 1)")

    p = sub.add_parser("report", parser_class=_Parser,
                       help="aggregate a records file into summary.csv plus figures")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("plot", parser_class=_Parser,
                       help="render figures from an existing summary.csv")
    p.add_argument("--summary", required=True)
    p.add_argument("--out", required=True)
    return parser


def _run_dir(base: str, kind: str, explicit: str | None) -> Path:
    if explicit:
        path = Path(explicit)
        path.mkdir(parents=True, exist_ok=True)
        return path
    stamp = datetime.now(timezone.utc).strftime("%Y%m%d-%H%M%S")
    path = Path(base) / f"{kind}-{stamp}"
    suffix = 1
    while path.exists():
        suffix += 1
        path = Path(base) / f"{kind}-{stamp}-{suffix}"
    path.mkdir(parents=True)
    return path


def _cmd_prepare(args) -> int:
    table = load_expression_table(args.input, fmt=args.format,
                                  label_column=args.label_col, id_column=args.id_col)
    filtered = filter_features(table, args.prefix)
    balanced = balance_classes(filtered, args.per_class, args.seed)
    write_expression_table(balanced, args.out)
    print(f"prepared {balanced.n_samples} samples x {balanced.n_features} features "
          f"-> {args.out}")
    return 0


def _cmd_synth(args) -> int:
    spec = BenchmarkSpec(
        n_classes=args.classes,
        n_per_class=args.per_class,
        n_features=args.features,
        n_informative=args.informative,
        effect_size=args.effect,
        noise_std=args.noise,
        seed=args.seed,
    )
    bench = generate_benchmark(spec)
    write_expression_table(bench, args.out)
    print(f"benchmark {bench.n_samples} samples x {bench.n_features} features -> {args.out}")
    return 0


def _run_sweep_command(args, runner, kind: str) -> int:
    cfg = load_config(args.config, args.overrides)
    workers = args.workers if args.workers is not None else _default_workers()
    out = _run_dir(cfg.output, kind, args.out)
    write_snapshot(cfg, out / "config.json")
    records = runner(cfg, n_workers=workers)
    write_records_csv(records, out / "records.csv")
    summary = aggregate_records(records)
    write_summary_csv(summary, out / "summary.csv")
    n_failed = sum(1 for r in records if r.failed)
    n_degen = sum(1 for r in records if r.degenerate)
    print(f"{kind}: {len(records)} records ({n_failed} failed, {n_degen} degenerate) "
          f"-> {out}")
    return 0


def _cmd_report(args) -> int:
    records = read_records_csv(args.records)
    summary = aggregate_records(records)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_summary_csv(summary, out / "summary.csv")
    figures = render_plots(summary, out)
    print(f"report: summary.csv and {len(figures)} figures -> {out}")
    return 0


def _cmd_plot(args) -> int:
    summary = read_summary_csv(args.summary)
    figures = render_plots(summary, Path(args.out))
    print(f"plot: {len(figures)} figures -> {args.out}")
    return 0


_COMMANDS = {
    "prepare": _cmd_prepare,
    "synth": _cmd_synth,
    "run": lambda args: _run_sweep_command(args, run_bootstrap_experiment, "run"),
    "cv": lambda args: _run_sweep_command(args, run_cross_validation, "cv"),
    "report": _cmd_report,
    "plot": _cmd_plot,
}


def parse_and_dispatch(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(
        level=logging.DEBUG if args.verbose >= 2 else
        logging.INFO if args.verbose == 1 else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - last-resort reporting
        log.exception("unhandled failure")
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
