"""Command line entry point for the figure scripts.

Exit codes: 0 success, 1 usage error (bad arguments, unreadable or
unknown inputs).
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .figures import plot_convergence, plot_fields, plot_series
from .runview import UsageError


def cmd_series(args) -> int:
    channels = [c for c in args.channels.split(",") if c.strip()]
    logy = True if args.log else None
    out = plot_series(args.rundir, channels, args.out, logy=logy)
    print(f"wrote {out}")
    return 0


def cmd_fields(args) -> int:
    out = plot_fields(args.rundir, args.index, args.out)
    print(f"wrote {out}")
    return 0


def cmd_convergence(args) -> int:
    slopes = plot_convergence(args.reports, args.out)
    for label in sorted(slopes):
        print(f"{label}: slope {slopes[label]:.3f}")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="migcon-plots",
        description="Static figures from simulation run directories")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("series", help="plot functional channels over time")
    p.add_argument("rundir")
    p.add_argument("--channels", required=True,
                   help="comma-separated channel names")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--log", action="store_true",
                   help="force a log y axis")
    p.set_defaults(fn=cmd_series)

    p = sub.add_parser("fields", help="plot u and v of one snapshot")
    p.add_argument("rundir")
    p.add_argument("--index", type=int, required=True)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(fn=cmd_fields)

    p = sub.add_parser("convergence",
                       help="log-log plot of harness report CSVs")
    p.add_argument("reports", nargs="+")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(fn=cmd_convergence)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
