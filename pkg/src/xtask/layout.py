"""Shared-memory layout for a worker team.

Everything the workers coordinate through lives in a single shared-memory
segment: the queue matrix, barrier flags, load-balancing message cells,
per-worker task counters, the task record arena, and two scratch heaps
(int64 / float64) for kernel data. The segment is created by the parent
before forking, so all workers see the same mapping without reattaching.

All coordination words are 8-byte aligned and accessed as single int64
loads/stores through a memoryview cast. Per-worker scalars are spread one
cache line (8 words) apart to avoid false sharing.
"""

from __future__ import annotations

from dataclasses import dataclass

WORD = 8          # bytes per coordination word
LINE = 8          # words per cache line

# Task record word offsets (relative to the record base).
R_INFO = 0        # fn id (16 bits) | creator id << 16 (24 bits) | payload len << 40
R_PARENT = 1      # parent record index + 1; 0 means no parent
R_SF = 2          # children spawned << 1 | finished (single writer: the executor)
R_UID = 3         # per-creator sequence number (only written when uid logging is on)
R_DONEBASE = 4    # n_workers completion-stripe words follow; payload after that

INFO_CREATOR_SHIFT = 16
INFO_PLEN_SHIFT = 40
INFO_FN_MASK = (1 << 16) - 1
INFO_CREATOR_MASK = (1 << 24) - 1


def _align_line(w: int) -> int:
    return (w + LINE - 1) // LINE * LINE


@dataclass(frozen=True)
class TeamLayout:
    """Word offsets of every section in the team's shared segment."""

    n_workers: int
    queue_capacity: int
    arena_records: int
    payload_bytes: int
    scratch_i64_words: int      # per-worker int64 scratch partition
    scratch_f64_words: int      # per-worker float64 scratch partition
    kernel_i64_words: int       # kernel-owned int64 block at scratch start
    kernel_f64_words: int       # kernel-owned float64 block at scratch start

    # section bases, in words (filled by build())
    abort_w: int = 0
    gather_round_w: int = 0
    ready_w: int = 0
    created_w: int = 0
    completed_w: int = 0
    arrived_w: int = 0
    release_w: int = 0
    complete_w: int = 0
    round_w: int = 0
    request_w: int = 0
    rings_w: int = 0
    ring_words: int = 0
    arena_w: int = 0
    rec_words: int = 0
    i64_w: int = 0
    f64_w: int = 0
    total_words: int = 0

    @staticmethod
    def build(n_workers: int, queue_capacity: int, arena_records: int,
              payload_bytes: int, scratch_i64_words: int, scratch_f64_words: int,
              kernel_i64_words: int = 64, kernel_f64_words: int = 0) -> "TeamLayout":
        n = n_workers
        payload_words = (payload_bytes + WORD - 1) // WORD
        rec_words = R_DONEBASE + n + payload_words
        ring_words = 2 * LINE + queue_capacity   # head line, tail line, slots

        w = 0
        abort_w = w; w += 1
        gather_round_w = w; w += 1
        w = _align_line(w)
        ready_w = w; w += n * LINE
        created_w = w; w += n * LINE
        completed_w = w; w += n * LINE
        arrived_w = w; w += n * LINE
        release_w = w; w += n * LINE
        complete_w = w; w += n * LINE   # 2 child flags per node, line-aligned
        round_w = w; w += n * LINE
        request_w = w; w += n * LINE
        rings_w = w; w += n * n * ring_words
        arena_w = w; w += arena_records * rec_words
        i64_w = w; w += kernel_i64_words + n * scratch_i64_words
        w = _align_line(w)
        f64_w = w; w += kernel_f64_words + n * scratch_f64_words
        total = _align_line(w)

        return TeamLayout(
            n_workers=n, queue_capacity=queue_capacity,
            arena_records=arena_records, payload_bytes=payload_bytes,
            scratch_i64_words=scratch_i64_words, scratch_f64_words=scratch_f64_words,
            kernel_i64_words=kernel_i64_words, kernel_f64_words=kernel_f64_words,
            abort_w=abort_w, gather_round_w=gather_round_w, ready_w=ready_w,
            created_w=created_w, completed_w=completed_w, arrived_w=arrived_w,
            release_w=release_w, complete_w=complete_w, round_w=round_w,
            request_w=request_w, rings_w=rings_w, ring_words=ring_words,
            arena_w=arena_w, rec_words=rec_words, i64_w=i64_w, f64_w=f64_w,
            total_words=total,
        )

    @property
    def total_bytes(self) -> int:
        return self.total_words * WORD

    def ring_base(self, consumer: int, producer: int) -> int:
        return self.rings_w + (consumer * self.n_workers + producer) * self.ring_words

    def record_base(self, idx: int) -> int:
        return self.arena_w + idx * self.rec_words

    def worker_i64_base(self, worker: int) -> int:
        return self.i64_w + self.kernel_i64_words + worker * self.scratch_i64_words

    def worker_f64_base(self, worker: int) -> int:
        return self.f64_w + self.kernel_f64_words + worker * self.scratch_f64_words
