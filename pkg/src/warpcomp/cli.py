"""Command-line front end.

``verify run <file>`` executes one scenario; ``verify suite <family>``
generates and checks a seeded random family.  Both write a canonical JSON
report (plus a CSV margin table with ``--format csv``) and exit 0 when no
check is violated, 1 on any violation, 2 on configuration errors.
"""

import argparse
import sys

from .scenarios import (SUITE_FAMILIES, ScenarioError, emit_tables,
                        run_scenario, run_suite)


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=None,
                     help="64-bit seed override")
    sub.add_argument("--out", default=".", metavar="DIR",
                     help="directory for report artifacts (default: .)")
    sub.add_argument("--format", choices=("json", "csv"), default="json",
                     help="emit JSON only, or JSON plus the CSV row table")
    sub.add_argument("--tol", type=float, default=None,
                     help="override the comparison tolerance")
    sub.add_argument("--grid", type=int, default=None,
                     help="override the evaluation grid size")
    sub.add_argument("--ode-coeff", choices=("paper", "cinv"), default=None,
                     help="model ODE first-order coefficient mode")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="verify",
        description="Run comparison-geometry verification scenarios.")
    subs = parser.add_subparsers(dest="command", required=True)

    runp = subs.add_parser("run", help="execute one scenario file")
    runp.add_argument("scenario", help="path to a verify-scenario/1 JSON "
                      "file")
    _add_common(runp)

    suitep = subs.add_parser("suite", help="run a seeded random family")
    suitep.add_argument("family", choices=SUITE_FAMILIES)
    suitep.add_argument("--count", type=int, required=True,
                        help="number of instances")
    _add_common(suitep)
    return parser


def _print_summary(report, out):
    counts = report.verdict_counts
    order = ("equality", "holds", "skip", "violated")
    summary = "  ".join("%s=%d" % (v, counts[v])
                        for v in order if v in counts)
    print("checks: %s" % (summary or "none"), file=out)
    for cid in sorted(report.aggregates):
        slot = report.aggregates[cid]
        print("  %-34s n=%-4d worst=% .3e %s"
              % (cid, slot["entries"], slot["worst_margin"],
                 ("VIOLATED x%d" % slot["violations"])
                 if slot["violations"] else ""), file=out)
    print("verdict: %s" % ("PASS" if report.passed else "FAIL"), file=out)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            report = run_scenario(args.scenario, seed=args.seed,
                                  tol=args.tol, grid=args.grid,
                                  ode_coeff=args.ode_coeff)
        else:
            if args.seed is None:
                parser.error("suite needs --seed")
            report = run_suite(args.family, args.count, args.seed,
                               tol=args.tol, grid=args.grid,
                               ode_coeff=args.ode_coeff)
        paths = emit_tables(report, args.format, out_dir=args.out)
    except ScenarioError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    _print_summary(report, sys.stdout)
    for path in paths:
        print("wrote %s" % path, file=sys.stdout)
    print("wall time %.2f s" % report.wall_time_s, file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
