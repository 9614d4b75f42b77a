"""Command-line interface.

Subcommands: ``rate-study``, ``bound-eval``, ``verify-conditions``.  Each
takes a JSON config (--config) plus optional overrides, writes a CSV or
JSON table with a .meta.json sidecar, and exits with:

    0  success
    2  condition diagnostics violated
    3  unstable experiment (too many failed replications)
    4  configuration error
"""

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .errors import ConditionsViolated, ConfigError, UnstableExperiment
from .harness import ExperimentConfig, run_bound_eval, run_rate_study, verify_conditions

EXIT_OK = 0
EXIT_CONDITIONS = 2
EXIT_UNSTABLE = 3
EXIT_CONFIG = 4


def _add_common(sp):
    sp.add_argument("--config", required=True, help="path to a JSON experiment config")
    sp.add_argument("--seed", type=int, default=None, help="override the config seed")
    sp.add_argument("--out", default=".", help="output directory (default: current)")
    sp.add_argument("--workers", type=int, default=None, help="override the worker count")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mestrate",
        description="Monte Carlo rate studies and Wasserstein bounds for M-estimators",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("rate-study", "replicated estimation and W1-vs-Gaussian rate fitting"),
        ("bound-eval", "explicit Wasserstein bound tables (quadratic-form and plug-in)"),
        ("verify-conditions", "numeric diagnostics for the model regularity conditions"),
    ):
        _add_common(sub.add_parser(name, help=help_text))
    return parser


def _load_config(args):
    config = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=int(args.seed))
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        config = dataclasses.replace(config, workers=int(args.workers))
    return config


def _write_report(report, out_dir, stem, fmt):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        table_path = out / f"{stem}.csv"
        table_path.write_text(report.to_csv())
    else:
        table_path = out / f"{stem}.json"
        table_path.write_text(json.dumps(report.to_json_rows(), indent=2, sort_keys=True) + "\n")
    meta_path = out / f"{stem}.meta.json"
    meta_path.write_text(json.dumps(report.meta(), indent=2, sort_keys=True) + "\n")
    return table_path, meta_path


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    stem = args.command.replace("-", "_")
    try:
        if args.command == "rate-study":
            report = run_rate_study(config)
        elif args.command == "bound-eval":
            report = run_bound_eval(config)
        else:
            report = verify_conditions(config)
    except ConditionsViolated as exc:
        print(f"conditions violated: {exc}", file=sys.stderr)
        return EXIT_CONDITIONS
    except UnstableExperiment as exc:
        print(f"unstable experiment: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    table_path, meta_path = _write_report(report, args.out, stem, args.format)
    print(f"wrote {table_path} and {meta_path}")
    if args.command == "verify-conditions" and not report.all_passed:
        return EXIT_CONDITIONS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
