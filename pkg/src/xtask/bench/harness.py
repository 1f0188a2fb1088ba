"""Benchmark harness: per-kernel setup and verification, repeated runs,
and the machine-readable RESULT summary line."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from types import SimpleNamespace

import numpy as np

from ..profiling import (STALL, TASK, TICKS_PER_SECOND, CounterSet,
                         clock_overhead_ticks, dump)
from ..dlb import zone_blocks
from ..runtime import TeamConfig, TeamReport, team_run
from . import kernels, oracles
from .data import SharedArray

KERNELS = ("fib", "nqueens", "msort", "strassen", "imbalance", "hashbucket")


@dataclass
class BenchSpec:
    kernel: str
    team: TeamConfig
    params: dict = field(default_factory=dict)
    repeat: int = 1
    profile_dir: str | None = None
    seed: int = 0

    def args_string(self) -> str:
        return " ".join(f"{k}={v}" for k, v in sorted(self.params.items()))


@dataclass
class BenchResult:
    """One run: the team report plus the kernel's own value and check."""
    report: TeamReport
    value: object
    ok: bool
    detail: str = ""
    info: dict = field(default_factory=dict)


@dataclass
class BenchReport:
    spec: BenchSpec
    runs: list[BenchResult]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.runs)

    @property
    def wall_ms(self) -> list[float]:
        return [r.report.wall_ticks / 1e6 for r in self.runs]

    @property
    def mean_ms(self) -> float:
        w = self.wall_ms
        return sum(w) / len(w)

    def totals(self) -> CounterSet:
        merged = CounterSet()
        for r in self.runs:
            merged.merge(r.report.totals)
        return merged

    def stall_ticks(self) -> int:
        return sum(r.report.stall_ticks() for r in self.runs)

    def result_line(self) -> str:
        dlb = self.spec.team.dlb.strategy.value
        return (f"RESULT kernel={self.spec.kernel} threads={self.spec.team.n_workers} "
                f"dlb={dlb} mean_ms={self.mean_ms:.3f} min_ms={min(self.wall_ms):.3f} "
                f"max_ms={max(self.wall_ms):.3f} ok={str(self.ok).lower()}")


def _prepare_fib(spec, seed):
    n = spec.params.get("n", 30)
    cutoff = spec.params.get("cutoff", 10)
    user = SimpleNamespace(res=SharedArray(np.int64, 1), _owned=None)
    user._owned = [user.res]
    expected = oracles.fib_seq(n)

    def verify(report):
        got = int(user.res.arr[0])
        return got, got == expected, f"expected {expected}, got {got}", {}

    return kernels.fib_root, (n, cutoff), user, verify, {}


def _prepare_nqueens(spec, seed):
    n = spec.params.get("n", 11)
    depth = spec.params.get("depth", 3)
    if not 1 <= n <= 16:
        raise ValueError("nqueens size must be in [1, 16]")
    user = SimpleNamespace(res=SharedArray(np.int64, 1), _owned=None)
    user._owned = [user.res]
    expected = oracles.nqueens_count(n)

    def verify(report):
        got = int(user.res.arr[0])
        return got, got == expected, f"expected {expected}, got {got}", {}

    return kernels.nqueens_root, (n, depth), user, verify, {}


def _prepare_msort(spec, seed):
    n = spec.params.get("n", 1 << 20)
    cutoff = spec.params.get("cutoff", 1 << 15)
    if n < 1:
        raise ValueError("msort needs at least one element")
    rng = np.random.default_rng(seed)
    arr = SharedArray(np.uint64, n)
    tmp = SharedArray(np.uint64, n)
    arr.arr[:] = rng.integers(0, 1 << 63, size=n, dtype=np.uint64)
    want_sum = oracles.checksum(arr.arr)
    user = SimpleNamespace(arr=arr, tmp=tmp, _owned=[arr, tmp])

    def verify(report):
        ok = oracles.is_sorted(user.arr.arr) and oracles.checksum(user.arr.arr) == want_sum
        return want_sum, ok, "output not a sorted permutation of the input", {}

    return kernels.msort_root, (n, cutoff), user, verify, {}


def _prepare_strassen(spec, seed):
    n = spec.params.get("n", 256)
    cutoff = spec.params.get("cutoff", 64)
    if n < 2 or n & (n - 1):
        raise ValueError("strassen size must be a power of two >= 2")
    if cutoff < 2 or cutoff & (cutoff - 1):
        raise ValueError("strassen cutoff must be a power of two >= 2")
    rng = np.random.default_rng(seed)
    a = SharedArray(np.float64, (n, n))
    b = SharedArray(np.float64, (n, n))
    c = SharedArray(np.float64, (n, n))
    a.arr[:] = rng.standard_normal((n, n))
    b.arr[:] = rng.standard_normal((n, n))
    user = SimpleNamespace(a=a, b=b, c=c, _owned=[a, b, c])
    bound = 1e-9 * n

    def verify(report):
        residual = oracles.matmul_residual(user.a.arr, user.b.arr, user.c.arr)
        return residual, residual <= bound, f"residual {residual:g} > {bound:g}", {}

    # worst case every recursion node ends up nested on one worker, so a
    # worker's arena must hold the whole tree's operand blocks
    words, nodes, m = 0, 1, n
    while m > cutoff:
        words += nodes * 21 * (m // 2) * (m // 2)
        nodes *= 7
        m //= 2
    patch = {"scratch_f64_words": words + 1024}
    return kernels.strassen_root, (n, cutoff), user, verify, patch


def _prepare_imbalance(spec, seed):
    n_tasks = spec.params.get("n_tasks", 400)
    skew = spec.params.get("skew", 0.0)
    unit_us = spec.params.get("unit_us", 200)
    heavy_frac = spec.params.get("heavy_frac", 0.25)
    if not 0.0 <= skew <= 1.0:
        raise ValueError("skew must be in [0, 1]")
    nw = spec.team.n_workers
    heavy_quota, light_quota, n_heavy = kernels.imbalance_quotas(
        nw, n_tasks, skew, heavy_frac)
    dur_ns = unit_us * 1000
    gap_ns = dur_ns // 2
    done = SharedArray(np.int64, max(nw, 1))
    user = SimpleNamespace(done=done, _owned=[done])
    expected = heavy_quota * n_heavy + light_quota * (nw - n_heavy)

    def verify(report):
        got = int(done.arr.sum())
        ok = got == expected
        per_worker = done.arr.tolist()
        info = {"executed_per_worker": per_worker}
        if report.config.profiling:
            info["stall_ticks_per_worker"] = [st[STALL] for st in report.state_ticks]
            info["task_ticks_per_worker"] = [st[TASK] for st in report.state_ticks]
        return got, ok, f"expected {expected} spins, got {got}", info

    # the creators' self-share must fit in their master queue, and every
    # parked task needs a live record
    cap = 32
    while cap < n_tasks:
        cap *= 2
    patch = {"queue_capacity": cap,
             "arena_records": max(spec.team.arena_records, 4 * cap)}
    return (kernels.imbalance_root,
            (heavy_quota, light_quota, n_heavy, dur_ns, gap_ns),
            user, verify, patch)


def _prepare_hashbucket(spec, seed):
    k = spec.params.get("k", 20)
    batch = spec.params.get("batch", 64)
    algo = spec.params.get("hash", "blake2")
    if not 1 <= k <= 26:
        raise ValueError("record count 2^k must have 1 <= k <= 26")
    if batch < 1:
        raise ValueError("batch must be >= 1")
    if algo not in kernels.HASH_ALGOS:
        raise ValueError(f"unknown hash {algo!r}; pick from {sorted(kernels.HASH_ALGOS)}")
    total = 1 << k
    batch = min(batch, total)
    records = SharedArray(np.uint8, total * kernels.RECORD_BYTES)
    filled = SharedArray(np.int64, spec.team.n_workers)
    user = SimpleNamespace(records=records, filled=filled, hash_name=algo,
                           records_mv=memoryview(records.shm.buf), _owned=None)

    def close():
        user.records_mv.release()
        records.close()
        filled.close()
    user._owned = [SimpleNamespace(close=close)]

    zone_of = zone_blocks(spec.team.n_workers, spec.team.zones)

    def verify(report):
        nonces = records.arr.view(np.uint32).reshape(-1, 8)[:, 7]
        ok = int(filled.arr.sum()) == total and bool(
            np.array_equal(nonces, np.arange(total, dtype=np.uint32)))
        throughput = total / (report.wall_ticks / TICKS_PER_SECOND)
        histogram = {}
        for w, count in enumerate(filled.arr.tolist()):
            histogram[zone_of[w]] = histogram.get(zone_of[w], 0) + count
        return throughput, ok, "records missing or nonces wrong", {
            "records_per_zone": histogram}

    return kernels.hash_root, (total, batch), user, verify, {}


_PREPARE = {
    "fib": _prepare_fib,
    "nqueens": _prepare_nqueens,
    "msort": _prepare_msort,
    "strassen": _prepare_strassen,
    "imbalance": _prepare_imbalance,
    "hashbucket": _prepare_hashbucket,
}


def run_experiment(spec: BenchSpec) -> BenchReport:
    """Run a kernel spec.repeat times, verifying every run against its
    sequential reference. All runs count; nothing is discarded."""
    if spec.kernel not in _PREPARE:
        raise ValueError(f"unknown kernel {spec.kernel!r}; pick from {KERNELS}")
    if spec.repeat < 1:
        raise ValueError("repeat must be >= 1")
    runs = []
    overhead = clock_overhead_ticks(1000)
    for rep in range(spec.repeat):
        seed = spec.seed + rep
        root_fn, root_args, user, verify, patch = _PREPARE[spec.kernel](spec, seed)
        team = replace(spec.team, seed=seed, **patch)
        try:
            report = team_run(team, root_fn, root_args, user=user,
                              benchmark=spec.kernel, benchmark_args=spec.args_string())
            report.clock_overhead = overhead
            value, ok, detail, info = verify(report)
            runs.append(BenchResult(report, value, ok, "" if ok else detail, info))
            if spec.profile_dir:
                dump(report, os.path.join(spec.profile_dir, f"run_{rep:02d}"))
        finally:
            owned = getattr(user, "_owned", None) or ()
            for res in owned:
                res.close()
    return BenchReport(spec, runs)
