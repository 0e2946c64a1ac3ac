"""Command-line entry point."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .config import ESTIMATORS, PRESETS, ConfigError, dump_config, load_config, preset
from .montecarlo import run_monte_carlo
from .results import emit_results

log = logging.getLogger("irscascade")


def _floats(text):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _names(text):
    return tuple(x.strip() for x in text.split(",") if x.strip())


def build_parser():
    parser = argparse.ArgumentParser(prog="irscascade",
                                     description="IRS cascaded-channel estimation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_args(p):
        p.add_argument("-v", "--verbose", action="store_true", help="log progress")
        p.add_argument("--preset", choices=sorted(PRESETS), help="start from a preset")
        p.add_argument("--config", help="INI file; its values override the preset")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--pnr", type=_floats, help="comma-separated PNR grid in dB")
        p.add_argument("--estimators", type=_names,
                       help=f"comma-separated subset of {','.join(ESTIMATORS)}")
        p.add_argument("--min-separation", type=float, dest="min_separation",
                       help="minimum cosine gap between paths")

    run = sub.add_parser("run", help="run a Monte Carlo sweep and write results")
    add_config_args(run)
    run.add_argument("--out", required=True, help="output path")
    run.add_argument("--format", choices=("csv", "json"), default=None,
                     help="defaults to the extension of --out, else csv")
    run.add_argument("--jobs", type=int, help="worker processes")

    show = sub.add_parser("show-config", help="print the resolved configuration")
    add_config_args(show)
    return parser


def resolve_config(args):
    cfg = preset(args.preset) if args.preset else None
    if args.config:
        cfg = load_config(args.config, base=cfg)
    if cfg is None:
        cfg = preset("fig5")
    overrides = {}
    for name, key in (("seed", "seed"), ("trials", "trials"), ("pnr", "pnr_db"),
                      ("estimators", "estimators"), ("min_separation", "min_separation"),
                      ("jobs", "jobs")):
        value = getattr(args, name, None)
        if value is not None:
            overrides[key] = value
    return replace(cfg, **overrides).validate()


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
    except (ConfigError, OSError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "show-config":
        print(dump_config(cfg))
        print(f"# overhead T = {cfg.overhead}, T_LS = {cfg.overhead_ls}")
        return 0

    fmt = args.format or ("json" if args.out.lower().endswith(".json") else "csv")
    log.info("running %s: %d trials x %d PNR points", cfg.name, cfg.trials, len(cfg.pnr_db))
    records = run_monte_carlo(
        cfg, progress=lambda done, total: log.info("trial %d/%d", done, total))
    try:
        emit_results(records, fmt, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 3
    for rec in records:
        log.info("%-16s %5.1f dB  NMSE %.3e  failures %d  %.1f ms/trial", rec.estimator,
                 rec.pnr_db, rec.nmse_H, rec.failures, rec.mean_runtime_ms)
    return 0


if __name__ == "__main__":
    sys.exit(main())
