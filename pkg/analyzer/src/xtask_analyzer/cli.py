"""xtask-analyze: turn profiler dumps into timelines, tables, and advice.

    xtask-analyze timeline --in run_00 --out out/timeline
    xtask-analyze stats --in run_00 --in run_01 --out stats.csv
    xtask-analyze stealsize --nsteal 32 --nvictim 24 --tinterval 1000
    xtask-analyze recommend --task-size 50000
"""

from __future__ import annotations

import argparse
import sys

from .parse import DumpError, parse_dump
from .summaries import save_timeline, stats_table, write_stats_csv
from .tuning import recommend_settings, steal_size


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xtask-analyze",
                                description="offline analysis of xtask profiler dumps")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("timeline", help="per-worker state decomposition")
    sp.add_argument("--in", dest="dirs", action="append", required=True,
                    metavar="DIR", help="dump directory")
    sp.add_argument("--out", required=True, metavar="PATH",
                    help="basename for the .csv and .png outputs")

    sp = sub.add_parser("stats", help="mean statistics across dumps")
    sp.add_argument("--in", dest="dirs", action="append", required=True,
                    metavar="DIR", help="dump directory (repeatable)")
    sp.add_argument("--out", default=None, metavar="PATH",
                    help="also write the table as CSV here")
    sp.add_argument("--spread", action="store_true",
                    help="include min/max alongside the mean")

    sp = sub.add_parser("stealsize", help="steal size for a configuration")
    sp.add_argument("--nsteal", type=int, required=True)
    sp.add_argument("--nvictim", type=int, required=True)
    sp.add_argument("--tinterval", type=int, required=True)

    sp = sub.add_parser("recommend", help="settings for a task size")
    sp.add_argument("--task-size", type=float, required=True,
                    metavar="CYCLES")
    return p


def _fmt_range(lo: float, hi: float) -> str:
    if hi == float("inf"):
        return f"> {lo:g}"
    if lo == hi:
        return f"{lo:g}"
    return f"{lo:g} .. {hi:g}"


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "timeline":
            if len(args.dirs) != 1:
                print("error: timeline takes exactly one --in", file=sys.stderr)
                return 2
            written = save_timeline(parse_dump(args.dirs[0]), args.out)
            for path in written:
                print(path)
        elif args.command == "stats":
            dumps = [parse_dump(d) for d in args.dirs]
            table = stats_table(dumps, spread=args.spread)
            width = max(len(k) for k in table)
            for label, value in table.items():
                if isinstance(value, tuple):
                    mean, lo, hi = value
                    print(f"{label:<{width}}  {mean:14.1f}  (min {lo}, max {hi})")
                else:
                    print(f"{label:<{width}}  {value:14.1f}")
            if args.out:
                write_stats_csv(table, args.out)
                print(args.out)
        elif args.command == "stealsize":
            print(f"{steal_size(args.nsteal, args.nvictim, args.tinterval):g}")
        elif args.command == "recommend":
            rec = recommend_settings(args.task_size)
            print(f"strategy={rec.strategy} "
                  f"p_local={_fmt_range(*rec.p_local)} "
                  f"steal_size={_fmt_range(*rec.steal_size)}")
    except (DumpError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
