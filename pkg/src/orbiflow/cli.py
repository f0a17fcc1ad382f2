"""Command line entry point.

Exit status is 0 when every check passes, 1 when a check fails or an
experiment errors, and 2 for configuration errors.
"""

import argparse
import sys

from .errors import ConfigError, ExperimentError
from .runner import load_config, load_grid, run, sweep, validate

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _print_report(report, stream=None):
    stream = sys.stdout if stream is None else stream
    status = "PASS" if report.passed else "FAIL"
    print(f"{report.experiment} [{report.config_hash[:10]}] {status} in {report.wall_time:.2f}s", file=stream)
    for c in report.checks:
        mark = "ok  " if c.passed else "FAIL"
        print(f"  {mark} {c.name}: {c.value:.6g} (bound {c.bound:.6g})", file=stream)
    for k, v in report.values.items():
        print(f"       {k} = {v}", file=stream)
    if report.error:
        print(f"  error: {report.error}", file=stream)


def build_parser():
    parser = argparse.ArgumentParser(prog="orbiflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="output directory (overrides the config)")

    p_sweep = sub.add_parser("sweep", help="run a config over a parameter grid")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--grid", required=True)
    p_sweep.add_argument("--out", help="output directory (overrides the config)")

    p_trace = sub.add_parser("trace", help="regularized trace of one spectrum branch")
    p_trace.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p_trace.add_argument("--b", type=float, default=2.0)
    p_trace.add_argument("--N", type=int, default=10_000)
    p_trace.add_argument("--seed", type=int, default=0)
    p_trace.add_argument("--out", default="runs/trace")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_PASS
    try:
        if args.command == "run":
            report = run(load_config(args.config), args.out)
            _print_report(report)
            return EXIT_PASS if report.passed else EXIT_FAIL
        if args.command == "sweep":
            reports = sweep(load_config(args.config), load_grid(args.grid), args.out)
            for report in reports:
                _print_report(report)
            return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL
        config = validate("trace", args.seed, {"lam": args.lam, "b": args.b, "N": args.N}, args.out)
        report = run(config)
        _print_report(report)
        return EXIT_PASS if report.passed else EXIT_FAIL
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        for key, msg in exc.fields.items():
            print(f"  {key}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except ExperimentError as exc:
        print(f"experiment error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
