"""Per-worker event timeline, statistics counters, and end-of-run dump.

Each worker keeps a private state stack (task, task-create, taskwait,
barrier, stall) and emits one flat timeline segment per state transition,
so per-kind durations add up to at most the worker's wall time with no
overlaps. Recording is two monotonic-clock reads and a list append; with
profiling off it is a no-op. Nothing here is shared between workers while
the team runs; dumps happen after the last worker has left.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

TASK = 0
TASK_CREATE = 1
TASKWAIT = 2
BARRIER = 3
STALL = 4

KIND_NAMES = ("TASK", "TASK_CREATE", "TASKWAIT", "BARRIER", "STALL")

PERFLOG_ENV = "XTASK_PERFLOG_DIR"

timestamp_now = time.monotonic_ns
TICKS_PER_SECOND = 1_000_000_000


def clock_overhead_ticks(samples: int = 10_000) -> float:
    """Mean cost of one timestamp_now() call, measured by a self-timing loop."""
    t0 = timestamp_now()
    for _ in range(samples):
        timestamp_now()
    return (timestamp_now() - t0) / samples


class StateClock:
    """Stack of profiling states emitting non-overlapping (kind, start, end)
    segments on every transition."""

    __slots__ = ("enabled", "events", "stack", "seg_start")

    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.events: list[tuple[int, int, int]] = []
        self.stack: list[int] = []
        self.seg_start = 0

    def push(self, kind: int) -> None:
        if not self.enabled:
            return
        now = timestamp_now()
        stack = self.stack
        if stack:
            self.events.append((stack[-1], self.seg_start, now))
        stack.append(kind)
        self.seg_start = now

    def pop(self) -> None:
        if not self.enabled:
            return
        now = timestamp_now()
        stack = self.stack
        self.events.append((stack.pop(), self.seg_start, now))
        self.seg_start = now

    def totals(self) -> list[int]:
        sums = [0] * len(KIND_NAMES)
        for kind, start, end in self.events:
            sums[kind] += end - start
        return sums


COUNTER_FIELDS = (
    "ntasks_self", "ntasks_local", "ntasks_remote",
    "ntasks_static_push", "ntasks_self_push", "ntasks_imm_exec",
    "nreq_sent", "nreq_handled", "nreq_has_steal",
    "nreq_src_empty", "nreq_target_full",
    "ntasks_stolen_local", "ntasks_stolen_remote",
    "tasks_created", "tasks_executed",
)


class CounterSet:
    """Per-worker statistics. ntasks_self/local/remote classify executed
    tasks by creator origin; the nreq_* family tracks the steal-request
    funnel on the victim side; ntasks_stolen_* credit migrated tasks to the
    victim, split by the thief's zone."""

    __slots__ = COUNTER_FIELDS

    def __init__(self):
        for f in COUNTER_FIELDS:
            setattr(self, f, 0)

    def as_dict(self) -> dict[str, int]:
        return {f: getattr(self, f) for f in COUNTER_FIELDS}

    def merge(self, other: "CounterSet") -> None:
        for f in COUNTER_FIELDS:
            setattr(self, f, getattr(self, f) + getattr(other, f))

    @classmethod
    def from_dict(cls, d: dict[str, int]) -> "CounterSet":
        c = cls()
        for f in COUNTER_FIELDS:
            setattr(c, f, int(d.get(f, 0)))
        return c


@dataclass
class WorkerDump:
    """Everything one worker ships home when the team ends."""
    worker: int
    counters: dict[str, int]
    events: list[tuple[int, int, int]]
    state_ticks: list[int]
    wall_ticks: int
    census_gather: int = 0
    census_release: int = 0
    executed_uids: list[int] = field(default_factory=list)
    created: int = 0
    completed: int = 0
    max_steal_per_request: int = 0
    final_round: int = 1


def resolve_dump_dir(directory: str | None) -> str:
    d = directory or os.environ.get(PERFLOG_ENV)
    if not d:
        raise ValueError(
            f"no dump directory: pass one or set {PERFLOG_ENV}")
    return d


def dump(report, directory: str | None = None) -> list[str]:
    """Write per-worker events and counters files plus a manifest.

    Returns the paths written. The manifest is written last so a failed
    dump never leaves a manifest pointing at missing files.
    """
    d = resolve_dump_dir(directory)
    os.makedirs(d, exist_ok=True)
    if not report.clock_overhead:
        report.clock_overhead = clock_overhead_ticks(1000)
    written = []
    for w in report.workers:
        epath = os.path.join(d, f"events_{w.worker}.csv")
        with open(epath, "w") as f:
            f.write("worker_id,kind,start_ticks,end_ticks\n")
            wid = w.worker
            for kind, start, end in w.events:
                f.write(f"{wid},{KIND_NAMES[kind]},{start},{end}\n")
        written.append(epath)
        cpath = os.path.join(d, f"counters_{w.worker}.csv")
        with open(cpath, "w") as f:
            f.write("counter,value\n")
            for name, value in w.counters.items():
                f.write(f"{name},{value}\n")
        written.append(cpath)
    mpath = os.path.join(d, "manifest.txt")
    cfg = report.config
    with open(mpath, "w") as f:
        f.write(f"n_workers={cfg.n_workers}\n")
        f.write(f"zones={cfg.zones}\n")
        f.write(f"ticks_per_second={TICKS_PER_SECOND}\n")
        f.write(f"dlb_strategy={cfg.dlb.strategy.value}\n")
        f.write(f"dlb_n_victim={cfg.dlb.n_victim}\n")
        f.write(f"dlb_n_steal={cfg.dlb.n_steal}\n")
        f.write(f"dlb_t_interval={cfg.dlb.t_interval}\n")
        f.write(f"dlb_p_local={cfg.dlb.p_local}\n")
        f.write(f"queue_capacity={cfg.queue_capacity}\n")
        f.write(f"wall_time_ticks={report.wall_ticks}\n")
        f.write(f"benchmark={report.benchmark}\n")
        f.write(f"benchmark_args={report.benchmark_args}\n")
        f.write(f"clock_overhead_ticks={report.clock_overhead:.1f}\n")
    written.append(mpath)
    return written
