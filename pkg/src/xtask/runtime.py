"""Worker team lifecycle, task semantics, scheduling points, and taskwait.

A team is the calling process (worker 0) plus n_workers-1 forked worker
processes sharing one memory segment. Each worker allocates its queue-row
accessors and protocol cells, then meets the others at a startup
rendezvous before any task flows. Worker 0 runs the root task; everyone
else enters the termination barrier immediately and pulls work from there.

Task creation bumps the creator's created stripe and the parent's spawned
count before the record index is published to a ring, so the striped
global count can never miss in-flight work. If the chosen ring is full the
task body runs immediately on the creator instead. A worker inside
taskwait or the barrier keeps executing its own queued tasks, answering
steal requests, and (when idle long enough) playing thief itself.

Tasks are untied: any worker may run any queued task. Task bodies that
allocate team scratch for their children must taskwait before returning;
with that discipline scratch is a per-worker stack that unwinds as frames
complete, even when unrelated stolen tasks run in the middle of a wait.
"""

from __future__ import annotations

import marshal
import os
import pickle
import sys
import tempfile
import threading
import time
import traceback
from dataclasses import dataclass, field, replace
from multiprocessing import shared_memory
from random import Random

import numpy as np

from . import profiling
from .barrier import TreeBarrier
from .dlb import NO_THIEF, DlbCells, DlbConfig, DlbEngine, Strategy, zone_blocks
from .layout import (INFO_CREATOR_SHIFT, INFO_FN_MASK, INFO_PLEN_SHIFT, LINE,
                     R_DONEBASE, R_INFO, R_PARENT, R_SF, R_UID, TeamLayout)
from .profiling import BARRIER, STALL, TASK, TASK_CREATE, TASKWAIT, CounterSet, StateClock, WorkerDump
from .rings import EMPTY, WorkerQueues
from .tasks import REGISTRY, RecordPool, TaskArena, fn_id

ROOT_CTX_IDX = 0
_IDLE_YIELD_MASK = 63
# Nested waits run tasks on the call stack, so workers get a thread with a
# roomy (lazily committed) stack instead of the fixed main-thread stack.
_WORKER_STACK_BYTES = 256 << 20
_WORKER_RECURSION_LIMIT = 400_000


class TeamError(RuntimeError):
    pass


@dataclass(frozen=True)
class TeamConfig:
    n_workers: int
    queue_capacity: int = 64
    zones: int = 1
    dlb: DlbConfig = field(default_factory=DlbConfig)
    profiling: bool = False
    seed: int = 0
    arena_records: int = 1 << 16
    payload_bytes: int = 96
    scratch_i64_words: int = 1 << 17
    scratch_f64_words: int = 0
    kernel_i64_words: int = 64
    kernel_f64_words: int = 0
    watchdog_s: float | None = 60.0
    log_uids: bool = False
    pin_workers: bool = False
    # per-thread limit on nested task frames: waits past it prefer direct
    # children (bounding live records near the task-tree frontier), and any
    # task started there runs on a fresh nested thread (the current one
    # blocks), so call stacks stay bounded at any scale
    nest_depth_cap: int = 256

    def validate(self) -> "TeamConfig":
        if self.n_workers < 1:
            raise ValueError("n_workers must be >= 1")
        cap = self.queue_capacity
        if cap < 2 or cap & (cap - 1):
            raise ValueError("queue_capacity must be a power of two >= 2")
        if not 1 <= self.zones <= self.n_workers:
            raise ValueError("zones must be in [1, n_workers]")
        if self.arena_records < 2:
            raise ValueError("arena_records must be >= 2")
        self.dlb.validate(self.n_workers)
        # more victims than peers is harmless intent: address everyone else
        if self.n_workers > 1 and self.dlb.n_victim >= self.n_workers:
            return replace(self, dlb=replace(self.dlb, n_victim=self.n_workers - 1))
        return self


@dataclass
class TeamReport:
    config: TeamConfig
    wall_ticks: int
    workers: list[WorkerDump]
    totals: CounterSet
    state_ticks: list[list[int]]
    gather_updates: int
    release_writes: int
    restarts: int
    benchmark: str = ""
    benchmark_args: str = ""
    clock_overhead: float = 0.0

    @property
    def tasks_created(self) -> int:
        return self.totals.tasks_created

    @property
    def tasks_executed(self) -> int:
        return self.totals.tasks_executed

    def stall_ticks(self) -> int:
        return sum(st[STALL] for st in self.state_ticks)


class TaskContext:
    """What a task body sees: spawn/taskwait, identity, and team scratch.

    i64/f64 are team-wide shared arrays; offsets from alloc_* index into
    them and are valid on every worker. A task that hands scratch to its
    children must taskwait before returning: frames reclaim their scratch.
    """

    __slots__ = ("_w", "user", "worker_id", "zone", "n_workers", "i64", "f64")

    def __init__(self, worker: "_Worker", user):
        self._w = worker
        self.user = user
        self.worker_id = worker.id
        self.zone = worker.zone
        self.n_workers = worker.n
        self.i64 = worker.i64
        self.f64 = worker.f64

    def spawn(self, fn, *args) -> None:
        try:
            fid = fn._xtask_fn_id
        except AttributeError:
            raise TypeError(f"{fn!r} is not a registered task function; "
                            "decorate it with @task_fn at module level") from None
        self._w.spawn(fid, args)

    def taskwait(self) -> None:
        self._w.taskwait()

    def alloc_i64(self, count: int) -> int:
        return self._w.alloc_i64(count)

    def alloc_f64(self, count: int) -> int:
        return self._w.alloc_f64(count)


class _Frame:
    __slots__ = ("idx", "base", "spawned", "pending", "i64_mark", "f64_mark")

    def __init__(self, idx: int, base: int, i64_mark: int, f64_mark: int):
        self.idx = idx
        self.base = base
        self.spawned = 0
        self.pending: list[int] = []
        self.i64_mark = i64_mark
        self.f64_mark = f64_mark


class _Worker:
    """One worker's whole in-process state. Lives for one team run."""

    def __init__(self, team: "_Team", worker: int):
        cfg = team.config
        lay = team.layout
        self.team = team
        self.id = worker
        self.n = cfg.n_workers
        self.zone_of = team.zone_of
        self.zone = team.zone_of[worker]
        self.q = team.q
        self.buf = team.buf
        self.layout = lay
        self.queues = WorkerQueues(team.q, lay, worker)
        self.arena = TaskArena(team.q, team.buf, lay)
        self.pool = RecordPool(team.pool_slice(worker))
        self.counters = CounterSet()
        self.clock = StateClock(cfg.profiling)
        self.barrier = TreeBarrier(team.q, lay, worker)
        self.rng = Random((cfg.seed * 1_000_003 + worker) & 0xFFFFFFFF)
        self.dlb_on = cfg.dlb.strategy is not Strategy.SLB and self.n > 1
        self.engine = DlbEngine(worker, DlbCells(team.q, lay.round_w, lay.request_w),
                                cfg.dlb, team.zone_of, self.rng, self.counters,
                                self.queues, take=self._take_for_steal) if self.dlb_on else None
        self.created = 0
        self.completed = 0
        self.created_w = lay.created_w + worker * LINE
        self.completed_w = lay.completed_w + worker * LINE
        self.frames: list[_Frame] = []
        self.orphans: list[int] = []
        self.deferred: dict[int, list[int]] = {}   # parent link -> task indices
        self.n_deferred = 0
        self.depth_cap = cfg.nest_depth_cap
        self.thread_base = 0      # frame count where the active thread started
        self.timeout = 0
        self.idle_spins = 0
        self.stall_open = False
        self.uid_log: list[int] | None = [] if cfg.log_uids else None
        self.payload_limit = cfg.payload_bytes
        self.t_interval = cfg.dlb.t_interval
        self.arena_w = lay.arena_w
        self.rec_words = lay.rec_words
        self.payload_off = self.arena.payload_off
        self.zero_stripes = self.arena.zero_stripes
        self.info_creator = worker << INFO_CREATOR_SHIFT
        self.i64 = team.i64
        self.f64 = team.f64
        self.i64_top = lay.worker_i64_base(worker) - lay.i64_w
        self.i64_end = self.i64_top + lay.scratch_i64_words
        self.f64_top = lay.worker_f64_base(worker) - lay.f64_w
        self.f64_end = self.f64_top + lay.scratch_f64_words
        self.ctx = TaskContext(self, team.user)
        self.wall_start = 0
        self.aborted = False

    # ---- scratch ---------------------------------------------------------

    def alloc_i64(self, count: int) -> int:
        off = self.i64_top
        self.i64_top = off + count
        if self.i64_top > self.i64_end:
            raise MemoryError("int64 scratch exhausted; raise TeamConfig.scratch_i64_words")
        return off

    def alloc_f64(self, count: int) -> int:
        off = self.f64_top
        self.f64_top = off + count
        if self.f64_top > self.f64_end:
            raise MemoryError("float64 scratch exhausted; raise TeamConfig.scratch_f64_words")
        return off

    # ---- task lifecycle --------------------------------------------------

    def spawn(self, fid: int, args: tuple) -> None:
        # fused task creation: record init, count publication, placement
        prof = self.clock.enabled
        if prof:
            self.clock.push(TASK_CREATE)
        try:
            engine = self.engine
            if engine is not None:
                engine.handle_request()   # task creation is a scheduling point
            if args:
                payload = marshal.dumps(args)
                plen = len(payload)
                if plen > self.payload_limit:
                    raise ValueError(
                        f"task arguments serialize to {plen} bytes, over the "
                        f"{self.payload_limit}-byte record payload "
                        "(raise TeamConfig.payload_bytes)")
            else:
                plen = 0
            pool_free = self.pool.free
            if pool_free:
                idx = pool_free.pop()
            else:
                idx = self._reclaim_some()
                if idx < 0:
                    raise MemoryError("task arena exhausted; raise TeamConfig.arena_records "
                                      "or join children more often")
            q = self.q
            frame = self.frames[-1]
            b = self.arena_w + idx * self.rec_words
            q[b] = fid | self.info_creator | (plen << INFO_PLEN_SHIFT)
            q[b + R_PARENT] = frame.idx + 1
            q[b + R_SF] = 0
            done = b + R_DONEBASE
            q[done:done + self.n] = self.zero_stripes
            if plen:
                off = b * 8 + self.payload_off
                self.buf[off:off + plen] = payload
            created = self.created = self.created + 1
            if self.uid_log is not None:
                q[b + R_UID] = created
            q[self.created_w] = created
            spawned = frame.spawned = frame.spawned + 1
            q[frame.base + R_SF] = spawned << 1
            frame.pending.append(idx)
            counters = self.counters
            counters.tasks_created += 1
            if engine is not None and engine.session_thief != NO_THIEF:
                if engine.redirect_push(idx):
                    return
            queues = self.queues
            cur = queues.rr_cursor
            target = queues.rr_targets[cur]
            queues.rr_cursor = cur + 1 if cur + 1 < self.n else 0
            if queues.producers[target].push(idx):
                if target == self.id:
                    counters.ntasks_self_push += 1
                else:
                    counters.ntasks_static_push += 1
                return
            counters.ntasks_imm_exec += 1
            self.run_task(idx)
        finally:
            if prof:
                self.clock.pop()

    def run_task(self, idx: int) -> None:
        if len(self.frames) - self.thread_base >= self.depth_cap:
            self._run_task_segmented(idx)
            return
        q = self.q
        b = self.arena_w + idx * self.rec_words
        info = q[b]
        fid = info & INFO_FN_MASK
        creator = (info >> INFO_CREATOR_SHIFT) & 0xFFFFFF
        plen = info >> INFO_PLEN_SHIFT
        if plen:
            off = b * 8 + self.payload_off
            args = marshal.loads(self.buf[off:off + plen])
        else:
            args = ()
        frame = _Frame(idx, b, self.i64_top, self.f64_top)
        self.frames.append(frame)
        prof = self.clock.enabled
        if prof:
            self.clock.push(TASK)
        try:
            REGISTRY[fid](self.ctx, *args)
        finally:
            if prof:
                self.clock.pop()
            self.frames.pop()
            self.i64_top = frame.i64_mark
            self.f64_top = frame.f64_mark
        if self.uid_log is not None:
            self.uid_log.append((creator << 40) | q[b + R_UID])
        q[b + R_SF] = (frame.spawned << 1) | 1
        parent = q[b + R_PARENT]
        if parent:
            slot = self.arena_w + (parent - 1) * self.rec_words + R_DONEBASE + self.id
            q[slot] += 1          # own stripe: single writer
        self.completed += 1
        q[self.completed_w] = self.completed
        counters = self.counters
        counters.tasks_executed += 1
        if creator == self.id:
            counters.ntasks_self += 1
        elif self.zone_of[creator] == self.zone:
            counters.ntasks_local += 1
        else:
            counters.ntasks_remote += 1
        pending = frame.pending
        if pending:
            self._reclaim_frame(frame)
        self.timeout = 0
        self.idle_spins = 0

    def _run_task_segmented(self, idx: int) -> None:
        """Run one task on a fresh thread with its own stack segment. The
        caller blocks on the join, so a worker still executes one task at a
        time; this only keeps each thread's recursion depth bounded."""
        box: list = []

        def run():
            saved = self.thread_base
            self.thread_base = len(self.frames)
            sys.setrecursionlimit(_WORKER_RECURSION_LIMIT)
            try:
                self.run_task(idx)
            except BaseException as exc:   # surfaced on the waiting thread
                box.append(exc)
            finally:
                self.thread_base = saved

        t = threading.Thread(target=run, name="xtask-stack-segment")
        t.start()
        t.join()
        if box:
            raise box[0]

    def _reclaim_frame(self, frame: _Frame) -> None:
        arena = self.arena
        pool = self.pool
        for idx in frame.pending:
            if arena.quiescent(arena.base(idx)):
                pool.release(idx)
            else:
                self.orphans.append(idx)

    def _reclaim_some(self) -> int:
        """Pool ran dry: try to recover records from the current frame's
        finished children and from orphans."""
        arena = self.arena
        pool = self.pool
        for src in ([f.pending for f in self.frames] + [self.orphans]):
            keep = []
            for idx in src:
                if arena.quiescent(arena.base(idx)):
                    pool.release(idx)
                else:
                    keep.append(idx)
            src[:] = keep
        return pool.alloc()

    # ---- deferred tasks (parked by deep-nested waits) ---------------------

    def _defer(self, idx: int) -> None:
        key = self.q[self.arena.base(idx) + R_PARENT]
        self.deferred.setdefault(key, []).append(idx)
        self.n_deferred += 1

    def _take_deferred_any(self) -> int:
        if not self.n_deferred:
            return EMPTY
        key, lst = next(iter(self.deferred.items()))
        idx = lst.pop()
        if not lst:
            del self.deferred[key]
        self.n_deferred -= 1
        return idx

    def _take_deferred_child(self, parent_link: int) -> int:
        lst = self.deferred.get(parent_link)
        if not lst:
            return EMPTY
        idx = lst.pop()
        if not lst:
            del self.deferred[parent_link]
        self.n_deferred -= 1
        return idx

    # ---- scheduling ------------------------------------------------------

    def try_run_one(self) -> bool:
        """Run one queued (or parked) task; True when something ran."""
        if self.n_deferred and len(self.frames) - self.thread_base < self.depth_cap:
            idx = self._take_deferred_any()
        else:
            idx = self.queues.dequeue_next()
        if idx == EMPTY:
            return False
        if self.dlb_on:
            self.engine.handle_request()   # we just found work: act as victim
        if self.stall_open:
            self.clock.pop()
            self.stall_open = False
        self.run_task(idx)
        return True

    def idle_tick(self) -> None:
        """Idle bookkeeping: stall accounting, the thief timeout, backoff."""
        if not self.stall_open:
            self.clock.push(STALL)
            self.stall_open = True
        if self.dlb_on:
            self.timeout += 1
            if self.timeout >= self.t_interval:
                self.timeout = 0
                self.engine.thief_request_round()
        self._idle_pause()

    def scheduling_point(self) -> bool:
        """Run one task if any is queued in our row; otherwise idle
        bookkeeping (timeout, thief requests). True when a task ran."""
        if self.try_run_one():
            return True
        self.idle_tick()
        return False

    def _idle_pause(self) -> None:
        # graduated backoff: flat-out spinning starves busy workers of CPU
        # on small machines while gaining nothing
        spins = self.idle_spins = self.idle_spins + 1
        if spins & 15 == 0:
            if spins > 2048:
                time.sleep(0.0005)
            elif spins > 256:
                time.sleep(0.00005)
            else:
                time.sleep(0)

    def close_stall(self) -> None:
        if self.stall_open:
            self.clock.pop()
            self.stall_open = False

    def taskwait(self) -> None:
        frame = self.frames[-1]
        q = self.q
        done_w = frame.base + R_DONEBASE
        n = self.n
        done = 0
        for w in range(n):
            done += q[done_w + w]
        if done >= frame.spawned:
            return
        prof = self.clock.enabled
        if prof:
            self.clock.push(TASKWAIT)
        abort_w = self.layout.abort_w
        frames = self.frames
        depth_cap = self.depth_cap
        try:
            while True:
                done = 0
                for w in range(n):
                    done += q[done_w + w]
                if done >= frame.spawned:
                    break
                if q[abort_w]:
                    self.aborted = True
                    raise TeamError("team aborted while in taskwait")
                if len(frames) - self.thread_base < depth_cap:
                    self.scheduling_point()
                else:
                    self._wait_children_only(frame)
        finally:
            self.close_stall()
            if prof:
                self.clock.pop()

    def _wait_children_only(self, frame: _Frame) -> None:
        """Deep-nested wait: prefer our own direct children so the walk
        tracks the task tree instead of arbitrary queue interleaving.
        Unrelated queued tasks are parked, stay stealable, and still run
        here when no child is available: a remote worker's wait may depend
        on exactly one of them, and stack segmentation absorbs the depth."""
        me = frame.idx + 1      # parent links are stored index+1
        q = self.q
        arena = self.arena
        idx = self._take_deferred_child(me)
        if idx == EMPTY:
            while True:
                j = self.queues.dequeue_next()
                if j == EMPTY:
                    break
                if q[arena.base(j) + R_PARENT] == me:
                    idx = j
                    break
                self._defer(j)
        if idx == EMPTY and self.n_deferred:
            if self.dlb_on:
                self.engine.handle_request()   # parked tasks are stealable
            # no child available: running a parked task beats idling, and a
            # remote wait may even depend on it; the worker stack absorbs it
            idx = self._take_deferred_any()
        if idx != EMPTY:
            self.close_stall()
            self.run_task(idx)
            return
        if not self.stall_open:
            self.clock.push(STALL)
            self.stall_open = True
        if self.dlb_on:
            self.timeout += 1
            if self.timeout >= self.t_interval:
                self.timeout = 0
                self.engine.thief_request_round()
        self._idle_pause()

    def _take_for_steal(self) -> int:
        if self.n_deferred:
            return self._take_deferred_any()
        return self.queues.dequeue_next()

    def quiescent_for_barrier(self) -> bool:
        if self.n_deferred or not self.queues.row_empty():
            return False
        if self.id == 0:
            base = self.arena.base(ROOT_CTX_IDX)
            return self.q[base + R_SF] >> 1 == self.arena.children_done(base)
        return True

    # ---- main ------------------------------------------------------------

    def main(self, root_fid: int | None, root_args: tuple) -> WorkerDump:
        q = self.q
        lay = self.layout
        if self.team.config.pin_workers:
            try:
                cpus = sorted(os.sched_getaffinity(0))
                os.sched_setaffinity(0, {cpus[self.id % len(cpus)]})
            except OSError:
                pass
        # startup rendezvous: every queue row exists before any task moves
        q[lay.ready_w + self.id * LINE] = 1
        spins = 0
        while True:
            if all(q[lay.ready_w + w * LINE] for w in range(self.n)):
                break
            if q[lay.abort_w]:
                self.aborted = True
                return self._dump(0)
            spins += 1
            if not spins & _IDLE_YIELD_MASK:
                time.sleep(0)
        self.wall_start = profiling.timestamp_now()
        epoch = 1
        try:
            if root_fid is not None:
                self._run_root(root_fid, root_args)
            self._barrier_wait(epoch)
        except TeamError:
            pass
        except BaseException:
            q[lay.abort_w] = 1
            self.aborted = True
            traceback.print_exc()
        wall = profiling.timestamp_now() - self.wall_start
        return self._dump(wall)

    def _run_root(self, root_fid: int, root_args: tuple) -> None:
        # worker 0's initial frame is a task record too, so barrier and
        # taskwait conditions need no special casing
        base = self.arena.base(ROOT_CTX_IDX)
        ctx_frame = _Frame(ROOT_CTX_IDX, base, self.i64_top, self.f64_top)
        self.frames.append(ctx_frame)
        try:
            self.spawn(root_fid, root_args)
        finally:
            self.frames.pop()

    def _barrier_wait(self, epoch: int) -> None:
        q = self.q
        abort_w = self.layout.abort_w
        clock = self.clock
        clock.push(BARRIER)
        bar = self.barrier
        bar.arrive(epoch)
        try:
            while True:
                if q[abort_w]:
                    self.aborted = True
                    return
                if self.try_run_one():
                    continue
                if bar.step(epoch, self.quiescent_for_barrier()):
                    return
                self.idle_tick()
        finally:
            self.close_stall()
            clock.pop()

    def _dump(self, wall: int) -> WorkerDump:
        t0 = self.wall_start
        return WorkerDump(
            worker=self.id,
            counters=self.counters.as_dict(),
            events=[(k, s - t0, e - t0) for k, s, e in self.clock.events],
            state_ticks=self.clock.totals(),
            wall_ticks=wall,
            census_gather=self.barrier.census.gather_updates,
            census_release=self.barrier.census.release_writes,
            executed_uids=self.uid_log if self.uid_log is not None else [],
            created=self.created,
            completed=self.completed,
            max_steal_per_request=self.engine.max_moved_per_request if self.engine else 0,
            final_round=self.engine.round if self.engine else 1,
        )


class _Team:
    """Parent-side team state: the shared segment and its views."""

    def __init__(self, config: TeamConfig, user):
        self.config = config
        lay = TeamLayout.build(
            config.n_workers, config.queue_capacity, config.arena_records,
            config.payload_bytes, config.scratch_i64_words, config.scratch_f64_words,
            config.kernel_i64_words, config.kernel_f64_words)
        self.layout = lay
        self.zone_of = zone_blocks(config.n_workers, config.zones)
        self.shm = shared_memory.SharedMemory(create=True, size=max(lay.total_bytes, 16))
        self._mv = memoryview(self.shm.buf)
        self.q = self._mv.cast("q")
        self.buf = self._mv
        self.i64 = np.frombuffer(self.shm.buf, dtype=np.int64,
                                 count=lay.kernel_i64_words + config.n_workers * lay.scratch_i64_words,
                                 offset=lay.i64_w * 8)
        nf = lay.kernel_f64_words + config.n_workers * lay.scratch_f64_words
        self.f64 = np.frombuffer(self.shm.buf, dtype=np.float64, count=nf,
                                 offset=lay.f64_w * 8) if nf else np.empty(0)
        self.user = user
        self.q[lay.gather_round_w] = 1   # fresh complete flags hold 0: never valid

    def pool_slice(self, worker: int):
        # record 0 is the root context; the rest split evenly
        usable = self.config.arena_records - 1
        per = usable // self.config.n_workers
        lo = 1 + worker * per
        hi = 1 + (worker + 1) * per if worker < self.config.n_workers - 1 \
            else self.config.arena_records
        return range(lo, hi)

    def close(self):
        # Views may still be referenced by worker objects going out of scope
        # with us; the mapping itself is refcounted, only the name must go.
        self.i64 = None
        self.f64 = None
        try:
            self.q.release()
            self._mv.release()
            self.shm.close()
        except BufferError:
            pass
        try:
            self.shm.unlink()
        except FileNotFoundError:
            pass


def _drive_worker(worker: "_Worker", root_fid: int | None, root_args: tuple) -> WorkerDump:
    """Run a worker's main loop on a dedicated large-stack thread."""
    box: list = []
    dump_every = os.environ.get("XTASK_STACK_DUMP_S")
    if dump_every:
        import faulthandler
        faulthandler.dump_traceback_later(float(dump_every), repeat=True)

    def run():
        sys.setrecursionlimit(_WORKER_RECURSION_LIMIT)
        box.append(worker.main(root_fid, root_args))

    # process-global so nested stack-segment threads inherit it too; the
    # memory is virtual until touched
    threading.stack_size(_WORKER_STACK_BYTES)
    t = threading.Thread(target=run, name=f"xtask-worker-{worker.id}")
    t.start()
    t.join()
    if not box:
        raise TeamError(f"worker {worker.id} loop died without a report")
    return box[0]


def team_run(config: TeamConfig, root_fn, root_args: tuple = (), *,
             user=None, benchmark: str = "", benchmark_args: str = "") -> TeamReport:
    """Run a team to completion and return its aggregated report.

    root_fn must be a registered task function; it runs on worker 0 as a
    child of the root context. Returns after the final barrier released on
    every worker and all forked workers exited.
    """
    config = config.validate()
    root_fid = fn_id(root_fn)
    if root_fid >= len(REGISTRY):
        raise ValueError("root function not in registry")
    team = _Team(config, user)
    n = config.n_workers
    tmpdir = tempfile.mkdtemp(prefix="xtask-team-")
    pids: list[int] = []
    watchdog = None
    w0 = None
    timed_out = threading.Event()
    try:
        sys.stdout.flush()   # forked children share these buffers
        sys.stderr.flush()
        for w in range(1, n):
            pid = os.fork()
            if pid == 0:
                code = 0
                try:
                    dumpw = _drive_worker(_Worker(team, w), None, ())
                    with open(os.path.join(tmpdir, f"worker_{w}.blob"), "wb") as f:
                        pickle.dump(dumpw, f, protocol=pickle.HIGHEST_PROTOCOL)
                    if team.q[team.layout.abort_w]:
                        code = 17
                except BaseException:
                    traceback.print_exc()
                    team.q[team.layout.abort_w] = 1
                    code = 17
                finally:
                    sys.stdout.flush()
                    sys.stderr.flush()
                    os._exit(code)
            pids.append(pid)

        if config.watchdog_s:
            def _fire():
                timed_out.set()
                team.q[team.layout.abort_w] = 1
            watchdog = threading.Timer(config.watchdog_s, _fire)
            watchdog.daemon = True
            watchdog.start()

        w0 = _Worker(team, 0)
        dump0 = _drive_worker(w0, root_fid, root_args)

        dumps: dict[int, WorkerDump] = {0: dump0}
        deadline = time.monotonic() + 30.0
        for pid in pids:
            while True:
                done, status = os.waitpid(pid, os.WNOHANG)
                if done:
                    break
                if time.monotonic() > deadline:
                    os.kill(pid, 9)
                    os.waitpid(pid, 0)
                    status = -9
                    break
                time.sleep(0.001)
        for w in range(1, n):
            path = os.path.join(tmpdir, f"worker_{w}.blob")
            if os.path.exists(path):
                with open(path, "rb") as f:
                    dumps[w] = pickle.load(f)

        if timed_out.is_set():
            raise TeamError(f"team watchdog fired after {config.watchdog_s}s "
                            f"(n_workers={n}, dlb={config.dlb.strategy.value})")
        if team.q[team.layout.abort_w] or w0.aborted:
            raise TeamError("team aborted: a worker raised (see stderr)")
        if len(dumps) != n:
            missing = sorted(set(range(n)) - set(dumps))
            raise TeamError(f"workers {missing} exited without reporting")

        workers = [dumps[w] for w in range(n)]
        totals = CounterSet()
        for wd in workers:
            totals.merge(CounterSet.from_dict(wd.counters))
        report = TeamReport(
            config=config,
            wall_ticks=max(wd.wall_ticks for wd in workers),
            workers=workers,
            totals=totals,
            state_ticks=[wd.state_ticks for wd in workers],
            gather_updates=sum(wd.census_gather for wd in workers),
            release_writes=sum(wd.census_release for wd in workers),
            restarts=w0.barrier.census.restarts,
            benchmark=benchmark,
            benchmark_args=benchmark_args,
        )
        return report
    finally:
        if watchdog is not None:
            watchdog.cancel()
        team.q[team.layout.abort_w] = 1
        for pid in pids:
            try:
                os.kill(pid, 9)
            except ProcessLookupError:
                pass
            try:
                os.waitpid(pid, os.WNOHANG)
            except ChildProcessError:
                pass
        for w in range(1, n):
            try:
                os.unlink(os.path.join(tmpdir, f"worker_{w}.blob"))
            except FileNotFoundError:
                pass
        try:
            os.rmdir(tmpdir)
        except OSError:
            pass
        if w0 is not None:
            w0.i64 = w0.f64 = None   # drop buffer exports before the segment closes
            w0.ctx.i64 = w0.ctx.f64 = None
        team.close()
