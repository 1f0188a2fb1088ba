"""xtask-bench: run the benchmark kernels from the command line.

    xtask-bench fib --n 30 --cutoff 10 --threads 4 --dlb ws --repeat 10
    xtask-bench imbalance --skew 0.9 --threads 4 --dlb none --profile-dir out/

Prints one RESULT line per invocation for sweep scripting and exits 0 only
if every run passed its oracle check.
"""

from __future__ import annotations

import argparse
import os
import sys

from ..dlb import DlbConfig, Strategy
from ..profiling import PERFLOG_ENV
from ..runtime import TeamConfig, TeamError
from .harness import BenchSpec, run_experiment

DLB_BY_FLAG = {"none": Strategy.SLB, "rp": Strategy.NARP, "ws": Strategy.NAWS}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xtask-bench",
                                description="task-runtime benchmark harness")
    sub = p.add_subparsers(dest="kernel", required=True)

    def common(sp):
        sp.add_argument("--threads", type=int, default=4, metavar="N")
        sp.add_argument("--zones", type=int, default=1, metavar="Z")
        sp.add_argument("--dlb", choices=sorted(DLB_BY_FLAG), default="ws")
        sp.add_argument("--nvictim", type=int, default=8, metavar="V")
        sp.add_argument("--nsteal", type=int, default=32, metavar="S")
        sp.add_argument("--tinterval", type=int, default=10_000, metavar="T")
        sp.add_argument("--plocal", type=float, default=1.0, metavar="P")
        sp.add_argument("--repeat", type=int, default=1, metavar="R")
        sp.add_argument("--profile-dir", default=None, metavar="DIR",
                        help=f"dump profiler logs here (default: ${PERFLOG_ENV})")
        sp.add_argument("--queue-cap", type=int, default=64, metavar="C")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--arena", type=int, default=1 << 16, metavar="RECORDS")
        sp.add_argument("--watchdog", type=float, default=300.0, metavar="SECONDS")
        sp.add_argument("--pin", action="store_true",
                        help="pin workers to cpus round-robin")

    sp = sub.add_parser("fib", help="recursive fibonacci")
    sp.add_argument("--n", type=int, default=30)
    sp.add_argument("--cutoff", type=int, default=10)
    common(sp)

    sp = sub.add_parser("nqueens", help="n-queens solution count")
    sp.add_argument("--n", type=int, default=11)
    sp.add_argument("--depth", type=int, default=3,
                    help="rows placed by tasks before going serial")
    common(sp)

    sp = sub.add_parser("msort", help="parallel merge sort")
    sp.add_argument("--n", type=int, default=1 << 20)
    sp.add_argument("--cutoff", type=int, default=1 << 15)
    common(sp)

    sp = sub.add_parser("strassen", help="Strassen matrix multiply")
    sp.add_argument("--n", type=int, default=256)
    sp.add_argument("--cutoff", type=int, default=64)
    common(sp)

    sp = sub.add_parser("imbalance", help="synthetic skewed spin workload")
    sp.add_argument("--n-tasks", type=int, default=400)
    sp.add_argument("--skew", type=float, default=0.9,
                    help="fraction of total work concentrated on the heavy creators")
    sp.add_argument("--unit-us", type=int, default=200)
    sp.add_argument("--heavy-frac", type=float, default=0.25,
                    help="fraction of workers that create the heavy share")
    common(sp)

    sp = sub.add_parser("hashbucket", help="batched hash record generation")
    sp.add_argument("--k", type=int, default=20, help="generate 2^k records")
    sp.add_argument("--batch", type=int, default=64)
    sp.add_argument("--hash", choices=["blake2", "sha256", "mix64"], default="blake2")
    common(sp)
    return p


_KERNEL_PARAMS = {
    "fib": ("n", "cutoff"),
    "nqueens": ("n", "depth"),
    "msort": ("n", "cutoff"),
    "strassen": ("n", "cutoff"),
    "imbalance": ("n_tasks", "skew", "unit_us", "heavy_frac"),
    "hashbucket": ("k", "batch", "hash"),
}


def spec_from_args(args: argparse.Namespace) -> BenchSpec:
    profile_dir = args.profile_dir or os.environ.get(PERFLOG_ENV)
    team = TeamConfig(
        n_workers=args.threads,
        queue_capacity=args.queue_cap,
        zones=args.zones,
        dlb=DlbConfig(strategy=DLB_BY_FLAG[args.dlb], n_victim=args.nvictim,
                      n_steal=args.nsteal, t_interval=args.tinterval,
                      p_local=args.plocal),
        profiling=profile_dir is not None,
        arena_records=args.arena,
        watchdog_s=args.watchdog,
        pin_workers=args.pin,
    )
    params = {k: getattr(args, k) for k in _KERNEL_PARAMS[args.kernel]}
    return BenchSpec(kernel=args.kernel, team=team, params=params,
                     repeat=args.repeat, profile_dir=profile_dir, seed=args.seed)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(args)
        report = run_experiment(spec)
    except (ValueError, TeamError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(report.result_line())
    info = report.runs[0].info
    if "records_per_zone" in info:
        hist = " ".join(f"zone{z}={c}" for z, c in sorted(info["records_per_zone"].items()))
        print(f"HISTOGRAM {hist}")
    if "executed_per_worker" in info:
        counts = " ".join(str(c) for c in info["executed_per_worker"])
        print(f"TASKS_PER_WORKER {counts}")
    if not report.ok:
        for r in report.runs:
            if not r.ok:
                print(f"oracle mismatch: {r.detail}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
