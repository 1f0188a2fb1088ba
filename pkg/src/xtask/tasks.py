"""Task records, the function registry, and per-worker record pools.

A task is a fixed-size record in the shared arena: a registered function
id, marshal-packed arguments, a parent link, and completion bookkeeping.
Records travel between workers by index through the queue matrix, so any
worker can execute any task.

Bodies must be registered with @task_fn before the team starts (normally
at import time); workers inherit the registry through fork. Arguments are
marshal-serializable values small enough for the record's inline payload.

Completion accounting is strictly single-writer: a record's spawned count
and finished bit share one word written only by the task's executor, and
the per-worker done-stripe slot for worker w is written only by w. A
parent observes "all children finished" as spawned == sum(stripe), with
no shared counter ever needing a cross-worker read-modify-write.
"""

from __future__ import annotations

import marshal
from typing import Callable

from .layout import (INFO_CREATOR_SHIFT, INFO_FN_MASK, INFO_PLEN_SHIFT,
                     R_DONEBASE, R_INFO, R_PARENT, R_SF, TeamLayout, WORD)

REGISTRY: list[Callable] = []
MAX_REGISTRY = 1 << 16
NO_PARENT = 0


def task_fn(fn: Callable) -> Callable:
    """Register fn as a task body callable from any worker.

    Must run before team start (module import time is the natural place);
    ids are assigned in registration order, which fork keeps identical in
    every worker.
    """
    if len(REGISTRY) >= MAX_REGISTRY:
        raise RuntimeError("task function registry is full")
    fn._xtask_fn_id = len(REGISTRY)
    REGISTRY.append(fn)
    return fn


def fn_id(fn: Callable) -> int:
    try:
        return fn._xtask_fn_id
    except AttributeError:
        raise TypeError(f"{fn!r} is not a registered task function; "
                        "decorate it with @task_fn at module level") from None


def pack_args(args: tuple, limit: int) -> bytes:
    if not args:
        return b""
    payload = marshal.dumps(args)
    if len(payload) > limit:
        raise ValueError(
            f"task arguments serialize to {len(payload)} bytes, over the "
            f"{limit}-byte record payload (raise TeamConfig.payload_bytes)")
    return payload


class TaskArena:
    """Accessor for the shared record arena (one per worker process)."""

    __slots__ = ("q", "buf", "layout", "n", "arena_w", "rec_words",
                 "payload_off", "n_records", "zero_stripes")

    def __init__(self, q, buf, layout: TeamLayout):
        self.q = q
        self.buf = buf
        self.layout = layout
        self.n = layout.n_workers
        self.arena_w = layout.arena_w
        self.rec_words = layout.rec_words
        self.payload_off = (R_DONEBASE + self.n) * WORD
        self.n_records = layout.arena_records
        self.zero_stripes = memoryview(bytes(WORD * self.n)).cast("q")

    def base(self, idx: int) -> int:
        return self.arena_w + idx * self.rec_words

    def init_record(self, idx: int, fid: int, parent_idx: int, creator: int,
                    payload: bytes) -> int:
        """Reset and fill a record owned by the caller. Returns its base."""
        q = self.q
        b = self.base(idx)
        n = len(payload)
        q[b + R_INFO] = fid | (creator << INFO_CREATOR_SHIFT) | (n << INFO_PLEN_SHIFT)
        q[b + R_PARENT] = parent_idx + 1
        q[b + R_SF] = 0
        d = b + R_DONEBASE
        q[d:d + self.n] = self.zero_stripes
        if n:
            off = b * WORD + self.payload_off
            self.buf[off:off + n] = payload
        return b

    def read_args(self, base: int) -> tuple:
        n = self.q[base + R_INFO] >> INFO_PLEN_SHIFT
        if not n:
            return ()
        off = base * WORD + self.payload_off
        return marshal.loads(self.buf[off:off + n])

    def fn_of(self, base: int) -> int:
        return self.q[base + R_INFO] & INFO_FN_MASK

    def creator_of(self, base: int) -> int:
        return (self.q[base + R_INFO] >> INFO_CREATOR_SHIFT) & ((1 << 24) - 1)

    def children_done(self, base: int) -> int:
        q = self.q
        b = base + R_DONEBASE
        total = 0
        for w in range(self.n):
            total += q[b + w]
        return total

    def quiescent(self, base: int) -> bool:
        """Finished and all direct children finished: safe to recycle."""
        sf = self.q[base + R_SF]
        if not sf & 1:
            return False
        return sf >> 1 == self.children_done(base)


class RecordPool:
    """Worker-private free list of arena record indices.

    Indices are partitioned across workers at team start; recycled records
    join the pool of whichever worker reclaimed them. An index is owned by
    exactly one pool (or is in flight) at any time.
    """

    __slots__ = ("free",)

    def __init__(self, indices):
        self.free = list(indices)

    def alloc(self) -> int:
        if self.free:
            return self.free.pop()
        return -1

    def release(self, idx: int) -> None:
        self.free.append(idx)
