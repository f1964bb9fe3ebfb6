"""Command line entry point.

    covapprox experiment <name> [--config FILE] [overrides] [--assert]
    covapprox build --config FILE --out body.json
    covapprox certify --config FILE [--body body.json]
    covapprox estimate-m0 --config FILE
    covapprox baseline --config FILE

Exit codes: 0 success, 2 configuration error, 3 acceptance failure under
``--assert``. Logs go to stderr; data goes to ``--out`` (stdout if unset).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .harness.config import ConfigError, ExperimentConfig
from .harness.experiments import REGISTRY, run_experiment
from .harness.report import report_csv, report_json, write_report
from .harness.tools import body_from_dict, body_to_dict, build_body, run_baseline, run_certify, run_estimate_m0

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ASSERT = 3

log = logging.getLogger("covapprox")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=["json", "csv"], help="report format")
    common.add_argument("--directions", type=int, help="number of certification directions")
    common.add_argument("--trials", type=int, help="Monte Carlo trials")
    common.add_argument("--assert", dest="assert_", action="store_true", help="exit 3 when the aggregate check fails")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="covapprox", description="Covariance-ellipsoid approximation experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    ex = sub.add_parser("experiment", parents=[common], help="run a named experiment")
    ex.add_argument("name", help=f"one of {', '.join(sorted(REGISTRY))}")
    sub.add_parser("build", parents=[common], help="sample data and write a body file")
    cert = sub.add_parser("certify", parents=[common], help="certify a body against the true ellipsoid")
    cert.add_argument("--body", help="body file from 'build' (default: build from the config)")
    sub.add_parser("estimate-m0", parents=[common], help="estimate the block size m0(eta)")
    sub.add_parser("baseline", parents=[common], help="deviation diagnostics of the empirical covariance")
    sub.add_parser("list", help="list registered experiments")
    return p


def _config(args, name: str | None) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
        if name is not None and cfg.experiment != name:
            log.info("config names %r; running %r", cfg.experiment, name)
            cfg = cfg.with_overrides(experiment=name)
    else:
        cfg = ExperimentConfig(experiment=name or args.command)
    return cfg.with_overrides(
        seed=args.seed, output=args.out, format=args.format, directions=args.directions, trials=args.trials
    )


def _emit(report, cfg: ExperimentConfig) -> None:
    if cfg.output:
        write_report(report, cfg.output, cfg.format)
        log.info("wrote %s", cfg.output)
    else:
        sys.stdout.write(report_json(report) if cfg.format == "json" else report_csv(report))


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command == "list":
        for name in sorted(REGISTRY):
            print(f"{name:22s} {REGISTRY[name].summary}")
        return EXIT_OK
    try:
        cfg = _config(args, args.name if args.command == "experiment" else None)
        if args.command == "experiment":
            report = run_experiment(cfg)
        elif args.command == "build":
            _, body = build_body(cfg)
            text = json.dumps(body_to_dict(body), sort_keys=True) + "\n"
            if cfg.output:
                Path(cfg.output).write_text(text)
            else:
                sys.stdout.write(text)
            return EXIT_OK
        elif args.command == "certify":
            body = body_from_dict(json.loads(Path(args.body).read_text())) if args.body else None
            report = run_certify(cfg, body)
        elif args.command == "estimate-m0":
            report = run_estimate_m0(cfg)
        else:
            report = run_baseline(cfg)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"covapprox: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(report, cfg)
    if args.assert_ and report.passed is not True:
        summary = {k: v for k, v in report.aggregate.items() if isinstance(v, (bool, int, float, str))}
        print(f"covapprox: acceptance check failed: {summary}", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
