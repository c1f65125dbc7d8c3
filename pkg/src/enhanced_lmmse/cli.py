"""Command line entry point: campaigns, false-comparison theory and traces."""

from __future__ import annotations

import argparse
import csv
import sys

from .errors import ConfigurationError
from .experiments import emit_report, load_config, run_scenario, trace_to_csv, trace_transmissions
from .selector import METHODS
from .theory import false_comparison_probability, fuzzy_bound


def _cmd_run(args):
    cfg = load_config(args.config)
    if args.trials is not None:
        cfg.trials = args.trials
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.method is not None:
        cfg.method = args.method
    cfg.__post_init__()
    report = run_scenario(cfg)
    written = emit_report(report, args.out)
    print(f"wrote {written['report']} ({len(report.rows)} rows, {report.wall_time:.1f} s)")


def _cmd_theory(args):
    w = csv.writer(sys.stdout)
    w.writerow(["alpha", "k", "epsilon"])
    w.writerow([args.alpha, args.k, f"{false_comparison_probability(args.alpha, args.k):.9g}"])


def _cmd_bound(args):
    w = csv.writer(sys.stdout)
    w.writerow(["eps0", "k", "B"])
    w.writerow([args.eps0, args.k, f"{fuzzy_bound(args.eps0, args.k):.9g}"])


def _cmd_trace(args):
    cfg = load_config(args.config)
    sys.stdout.write(trace_to_csv(trace_transmissions(cfg)))


def build_parser():
    parser = argparse.ArgumentParser(prog="enhanced-lmmse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario campaign and write CSV reports")
    p.add_argument("--config", required=True, help="JSON scenario file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--method", choices=METHODS)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("theory", help="false-comparison probability eps(alpha, K)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=_cmd_theory)

    p = sub.add_parser("bound", help="fuzzy bound B at target eps0")
    p.add_argument("--eps0", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("trace", help="per-transmission MSE trace (estimated_corr scenario)")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_trace)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ConfigurationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
