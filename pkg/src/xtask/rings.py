"""Single-producer single-consumer rings and the per-team queue matrix.

Each worker owns one row of an N x N grid of bounded SPSC rings. The ring
at (consumer i, producer j) may only ever be pushed by worker j and popped
by worker i; the diagonal ring is worker i's master queue. With that
discipline every operation is a handful of plain word reads and writes:
no locks, no read-modify-write.

Producers and consumers keep their own index privately and publish it with
a single store. The opposite index is cached and only re-read when the
ring looks full (producer) or empty (consumer), which batches the shared
reads in the style of B-queue. Slot values are task-record indices, so a
push publishes one word; the record fields it points at were written
earlier in program order and are therefore visible to the popper on
store-ordered hardware (x86-64; CPython performs one aligned 8-byte store
per memoryview item assignment).
"""

from __future__ import annotations

from .layout import LINE, TeamLayout

EMPTY = -1


class RingProducer:
    """Producer endpoint of one SPSC ring. One instance per (ring, owner)."""

    __slots__ = ("q", "head_w", "tail_w", "slots_w", "cap", "mask",
                 "tail", "cached_head", "owner")

    def __init__(self, q, base_w: int, capacity: int, owner: int):
        self.q = q
        self.head_w = base_w
        self.tail_w = base_w + LINE
        self.slots_w = base_w + 2 * LINE
        self.cap = capacity
        self.mask = capacity - 1
        self.tail = q[self.tail_w]
        self.cached_head = q[self.head_w]
        self.owner = owner

    def push(self, val: int) -> bool:
        """Append val; False if the ring is full (ring unchanged)."""
        q = self.q
        t = self.tail
        if t - self.cached_head >= self.cap:
            self.cached_head = q[self.head_w]
            if t - self.cached_head >= self.cap:
                return False
        q[self.slots_w + (t & self.mask)] = val
        self.tail = t + 1
        q[self.tail_w] = t + 1
        return True

    def full(self) -> bool:
        if self.tail - self.cached_head < self.cap:
            return False
        self.cached_head = self.q[self.head_w]
        return self.tail - self.cached_head >= self.cap


class RingConsumer:
    """Consumer endpoint of one SPSC ring. One instance per (ring, owner)."""

    __slots__ = ("q", "head_w", "tail_w", "slots_w", "mask",
                 "head", "cached_tail", "owner")

    def __init__(self, q, base_w: int, capacity: int, owner: int):
        self.q = q
        self.head_w = base_w
        self.tail_w = base_w + LINE
        self.slots_w = base_w + 2 * LINE
        self.mask = capacity - 1
        self.head = q[self.head_w]
        self.cached_tail = q[self.tail_w]
        self.owner = owner

    def pop(self) -> int:
        """Remove and return the oldest value, or EMPTY."""
        q = self.q
        h = self.head
        if h == self.cached_tail:
            self.cached_tail = q[self.tail_w]
            if h == self.cached_tail:
                return EMPTY
        val = q[self.slots_w + (h & self.mask)]
        self.head = h + 1
        q[self.head_w] = h + 1
        return val

    def empty(self) -> bool:
        if self.head != self.cached_tail:
            return False
        self.cached_tail = self.q[self.tail_w]
        return self.head == self.cached_tail


class WorkerQueues:
    """Worker-side view of the queue matrix: its consumer row, its producer
    column, round-robin placement, and the rotating row scan.

    The placement cycle starts at the worker's own master queue, then visits
    every other worker in id order. The row scan always tries the master
    first, then the auxiliaries starting just after the producer that last
    yielded a task, so no producer is systematically favored.
    """

    __slots__ = ("worker", "n", "consumers", "producers", "rr_targets",
                 "rr_cursor", "scan_order", "scan_cursor")

    def __init__(self, q, layout: TeamLayout, worker: int):
        n = layout.n_workers
        cap = layout.queue_capacity
        self.worker = worker
        self.n = n
        # consumer endpoints for row `worker`; producer j fills (worker, j)
        self.consumers = [RingConsumer(q, layout.ring_base(worker, j), cap, worker)
                          for j in range(n)]
        # producer endpoints for column `worker`; (i, worker) feeds worker i
        self.producers = [RingProducer(q, layout.ring_base(i, worker), cap, worker)
                          for i in range(n)]
        self.rr_targets = [worker] + [(worker + 1 + k) % n for k in range(n - 1)]
        self.rr_cursor = 0
        self.scan_order = [(worker + 1 + k) % n for k in range(n - 1)]
        self.scan_cursor = 0

    def static_place(self) -> int:
        """Next round-robin target worker id; advances the cursor."""
        t = self.rr_targets[self.rr_cursor]
        self.rr_cursor += 1
        if self.rr_cursor == self.n:
            self.rr_cursor = 0
        return t

    def push_to(self, target: int, val: int) -> bool:
        if __debug__:
            assert 0 <= target < self.n
        return self.producers[target].push(val)

    def target_full(self, target: int) -> bool:
        return self.producers[target].full()

    def dequeue_next(self) -> int:
        """Master queue first, then auxiliaries in rotating order."""
        val = self.consumers[self.worker].pop()
        if val != EMPTY:
            return val
        order = self.scan_order
        m = len(order)
        cur = self.scan_cursor
        for k in range(m):
            pos = cur + k
            if pos >= m:
                pos -= m
            val = self.consumers[order[pos]].pop()
            if val != EMPTY:
                # next scan starts just after the producer that delivered
                self.scan_cursor = pos + 1 if pos + 1 < m else 0
                return val
        return EMPTY

    def row_empty(self) -> bool:
        for c in self.consumers:
            if not c.empty():
                return False
        return True
