"""Distributed tree barrier: lock-free gather, lock-less release.

Workers form a binary tree by id: parent(i) = (i-1)//2, children
{2i+1, 2i+2}. Ending a team region, a worker keeps executing and stealing
tasks until it is quiescent (arrived, idle, no dequeuable task, current
task has no unfinished children) and its subtree has gathered; it then
signals its parent's per-child complete flag once. The root additionally
requires the global task count to be zero before broadcasting release
flags down the tree with plain stores; a nonzero count restarts the gather
by bumping a shared gather-round, which invalidates all complete flags.

The gather performs exactly one complete-flag update per non-root worker
per clean round; the release performs one plain store per worker and no
read-modify-write at all. Every flag is a single-writer word: complete
flags are written by one child and read by one parent, release flags by
one parent, and the gather-round only by the root.

The global task count is striped: each worker singly writes its own
created and completed counters, and the root checks zero by reading all
completed stripes before all created stripes. Store ordering (creation
counted before a task is published to a ring, completion counted after it
ran) makes a zero observation prove that no task is queued or running.
"""

from __future__ import annotations

from .layout import LINE, TeamLayout


def topology(worker: int, n_workers: int) -> tuple[int | None, tuple[int, ...]]:
    """Parent and children of a worker in the binary barrier tree."""
    if not 0 <= worker < n_workers:
        raise ValueError(f"worker {worker} out of range [0, {n_workers})")
    parent = None if worker == 0 else (worker - 1) // 2
    children = tuple(c for c in (2 * worker + 1, 2 * worker + 2) if c < n_workers)
    return parent, children


class BarrierCensus:
    """Counts the barrier's shared-memory update classes for one worker."""

    __slots__ = ("gather_updates", "release_writes", "restarts")

    def __init__(self):
        self.gather_updates = 0
        self.release_writes = 0
        self.restarts = 0


class TreeBarrier:
    """One worker's endpoint of the team barrier.

    step() is non-blocking: the worker loop interleaves it with scheduling
    points so tasks keep flowing inside the barrier. It returns True once
    this worker's release flag shows the current region epoch.
    """

    __slots__ = ("q", "worker", "n", "parent", "child_slot", "children",
                 "arrived_w", "release_w", "complete_w", "gather_round_w",
                 "created_w", "completed_w", "census", "sent_round")

    def __init__(self, q, layout: TeamLayout, worker: int):
        self.q = q
        self.worker = worker
        self.n = layout.n_workers
        parent, children = topology(worker, self.n)
        self.parent = parent
        # slot 0 for a left child (odd id), 1 for a right child
        self.child_slot = None if parent is None else (worker - 1) % 2
        self.children = children
        self.arrived_w = layout.arrived_w
        self.release_w = layout.release_w
        self.complete_w = layout.complete_w
        self.gather_round_w = layout.gather_round_w
        self.created_w = layout.created_w
        self.completed_w = layout.completed_w
        self.census = BarrierCensus()
        self.sent_round = -1

    def arrive(self, epoch: int) -> None:
        if self.worker == 0:
            # fresh gather round per region: complete flags from the last
            # epoch can never satisfy this one
            self.q[self.gather_round_w] += 1
        self.q[self.arrived_w + self.worker * LINE] = epoch

    def task_count_is_zero(self) -> bool:
        # completed stripes first: a completion seen implies its creation
        # is seen too, so in-flight work can never be under-counted
        q = self.q
        done = 0
        for w in range(self.n):
            done += q[self.completed_w + w * LINE]
        made = 0
        for w in range(self.n):
            made += q[self.created_w + w * LINE]
        if __debug__:
            assert made >= done, "task count underflow: more completions than creations"
        return made == done

    def step(self, epoch: int, quiescent: bool) -> bool:
        """One gather/release evaluation. `quiescent` reflects whether the
        caller is idle with an empty row and no unfinished children."""
        q = self.q
        me = self.worker
        if q[self.release_w + me * LINE] == epoch:
            self._broadcast(epoch)
            return True
        if not quiescent:
            return False
        g = q[self.gather_round_w]
        if self.sent_round == g:
            return False
        for w in range(self.n):
            if q[self.arrived_w + w * LINE] != epoch:
                return False
        cw = self.complete_w
        for c in self.children:
            if q[cw + me * LINE + (c - 1) % 2] != g:
                return False
        if me == 0:
            if self.task_count_is_zero():
                q[self.release_w] = epoch          # root releases itself
                self.census.release_writes += 1
                self._broadcast(epoch)
                return True
            q[self.gather_round_w] = g + 1         # stale gather: go again
            self.census.restarts += 1
            return False
        q[cw + self.parent * LINE + self.child_slot] = g
        self.census.gather_updates += 1
        self.sent_round = g
        return False

    def _broadcast(self, epoch: int) -> None:
        q = self.q
        for c in self.children:
            q[self.release_w + c * LINE] = epoch
            self.census.release_writes += 1
