"""Lock-less thief/victim messaging and the two dynamic balancing strategies.

Every worker owns two 64-bit cells. Its `round` cell (written only by the
owner, initialized to 1) counts handled steal requests. Its `request` cell
is written by thieves and holds (thief id << 40) | round. A thief posts a
request only when the embedded round in the current request cell is behind
the victim's round cell, i.e. no request is pending; racing thieves may
overwrite each other, and the loser simply retries after its timeout.

On a valid request (embedded round == own round) the victim either
migrates up to n_steal queued tasks from its own row into the thief's ring
(work stealing), or opens a redirect session that sends its next n_steal
newly created tasks to the thief (redirect push). Work stealing advances
the round immediately; redirect push advances it when the session ends, so
a victim serves one redirect session at a time and the pending request
blocks competing thieves until then.

Everything is plain word-sized loads and stores on the two cells; stale
reads only delay a steal, never corrupt one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from random import Random

from .layout import LINE

ROUND_BITS = 40
ROUND_MASK = (1 << ROUND_BITS) - 1
MAX_WORKER_ID = 1 << 24
NO_THIEF = -1


class Strategy(enum.Enum):
    SLB = "slb"        # static round-robin only
    NARP = "na-rp"     # redirect newly created tasks
    NAWS = "na-ws"     # migrate already-queued tasks


@dataclass(frozen=True)
class DlbConfig:
    strategy: Strategy = Strategy.NAWS
    n_victim: int = 8
    n_steal: int = 32
    t_interval: int = 10_000
    p_local: float = 1.0

    def validate(self, n_workers: int) -> None:
        if self.n_victim < 1:
            raise ValueError("n_victim must be >= 1")
        if self.n_steal < 1:
            raise ValueError("n_steal must be >= 1")
        if self.t_interval < 1:
            raise ValueError("t_interval must be >= 1")
        if not 0.0 <= self.p_local <= 1.0:
            raise ValueError("p_local must be in [0, 1]")
        if n_workers >= MAX_WORKER_ID:
            raise ValueError("worker ids must fit in 24 bits")


def encode_request(thief: int, round_no: int) -> int:
    """(thief << 40) | round; the victim-side decode is the exact inverse."""
    if not 0 <= thief < MAX_WORKER_ID:
        raise ValueError(f"thief id {thief} out of 24-bit range")
    if not 0 <= round_no <= ROUND_MASK:
        raise ValueError(f"round {round_no} out of 40-bit range")
    return (thief << ROUND_BITS) | round_no


def decode_request(word: int) -> tuple[int, int]:
    return word >> ROUND_BITS, word & ROUND_MASK


def zone_blocks(n_workers: int, zones: int) -> list[int]:
    """Zone id per worker: contiguous near-equal blocks."""
    if not 1 <= zones <= n_workers:
        raise ValueError(f"zones must be in [1, {n_workers}]")
    base, rem = divmod(n_workers, zones)
    out = []
    for z in range(zones):
        out.extend([z] * (base + (1 if z < rem else 0)))
    return out


def pick_victim(worker: int, zone_of: list[int], p_local: float, rng: Random) -> int:
    """Random victim: NUMA-local with probability p_local, remote otherwise.

    Never returns the caller. A branch whose pool is empty (sole worker in
    its zone, or a single-zone team asked for a remote victim) falls back
    to the other pool.
    """
    n = len(zone_of)
    if n < 2:
        raise ValueError("need at least two workers to pick a victim")
    my_zone = zone_of[worker]
    want_local = p_local >= 1.0 or (p_local > 0.0 and rng.random() < p_local)
    for local in (want_local, not want_local):
        if local:
            pool = [w for w in range(n) if zone_of[w] == my_zone and w != worker]
        else:
            pool = [w for w in range(n) if zone_of[w] != my_zone]
        if pool:
            return pool[rng.randrange(len(pool))]
    raise AssertionError("unreachable: some other worker always exists")


class DlbCells:
    """Accessor for the round/request cell pair of every worker.

    All traffic goes through these four methods so tests can interpose a
    tap and verify the protocol never issues anything but word-sized loads
    and stores.
    """

    __slots__ = ("q", "round_w", "request_w", "tap")

    def __init__(self, q, round_w: int, request_w: int, tap=None):
        self.q = q
        self.round_w = round_w
        self.request_w = request_w
        self.tap = tap

    def read_round(self, worker: int) -> int:
        if self.tap is not None:
            self.tap.append(("load", "round", worker))
        return self.q[self.round_w + worker * LINE]

    def write_round(self, worker: int, value: int) -> None:
        if self.tap is not None:
            self.tap.append(("store", "round", worker))
        self.q[self.round_w + worker * LINE] = value

    def read_request(self, worker: int) -> int:
        if self.tap is not None:
            self.tap.append(("load", "request", worker))
        return self.q[self.request_w + worker * LINE]

    def write_request(self, worker: int, value: int) -> None:
        if self.tap is not None:
            self.tap.append(("store", "request", worker))
        self.q[self.request_w + worker * LINE] = value


class DlbEngine:
    """Per-worker driver for one strategy over the shared cells.

    The owning worker calls thief_request_round when its idle timeout
    elapses, handle_request whenever it has work in hand, and
    redirect_push from task creation while a redirect session is open.
    Task migration itself goes through callbacks into the queue matrix so
    this class stays free of queue bookkeeping.
    """

    def __init__(self, worker: int, cells: DlbCells, config: DlbConfig,
                 zone_of: list[int], rng: Random, counters, queues, take=None):
        self.worker = worker
        self.cells = cells
        self.config = config
        self.zone_of = zone_of
        self.my_zone = zone_of[worker]
        self.rng = rng
        self.counters = counters
        self.queues = queues
        self.take = take if take is not None else queues.dequeue_next
        self.round = 1
        cells.write_round(worker, 1)
        # redirect-push session state
        self.session_thief = NO_THIEF
        self.session_pushed = 0
        self.session_counted = False
        # instrumentation for the per-request steal bound
        self.max_moved_per_request = 0

    # ---- thief side ----------------------------------------------------

    def thief_request_round(self) -> int:
        """Post steal requests to up to n_victim distinct victims; returns
        how many request cells were written."""
        cfg = self.config
        n = len(self.zone_of)
        wanted = min(cfg.n_victim, n - 1)
        chosen: set[int] = set()
        sent = 0
        attempts = 0
        cells = self.cells
        while len(chosen) < wanted and attempts < 4 * wanted + 8:
            attempts += 1
            v = pick_victim(self.worker, self.zone_of, cfg.p_local, self.rng)
            if v in chosen:
                continue
            chosen.add(v)
            req = cells.read_request(v)
            round_no = cells.read_round(v)
            if (req & ROUND_MASK) < round_no:
                cells.write_request(v, encode_request(self.worker, round_no))
                sent += 1
        self.counters.nreq_sent += sent
        return sent

    # ---- victim side ---------------------------------------------------

    def handle_request(self) -> bool:
        """Check own request cell; on a valid request run the strategy.
        Returns True when a request was handled."""
        cells = self.cells
        req = cells.read_request(self.worker)
        if (req & ROUND_MASK) != self.round:
            return False
        thief = req >> ROUND_BITS
        cfg = self.config
        if cfg.strategy is Strategy.NAWS:
            self.counters.nreq_handled += 1
            self._steal_into(thief)
            self.round += 1
            cells.write_round(self.worker, self.round)
            return True
        # redirect push: open a session; the round advances when it ends
        if self.session_thief == NO_THIEF:
            self.counters.nreq_handled += 1
            self.session_thief = thief
            self.session_pushed = 0
            self.session_counted = False
            return True
        return False

    def _steal_into(self, thief: int) -> None:
        queues = self.queues
        counters = self.counters
        n_steal = self.config.n_steal
        moved = 0
        outcome = None
        take = self.take
        while moved < n_steal:
            if queues.target_full(thief):
                outcome = "full"
                break
            idx = take()
            if idx < 0:
                outcome = "empty"
                break
            queues.push_to(thief, idx)   # cannot fail: sole producer, just probed
            moved += 1
        if moved:
            counters.nreq_has_steal += 1
            if self.zone_of[thief] == self.my_zone:
                counters.ntasks_stolen_local += moved
            else:
                counters.ntasks_stolen_remote += moved
        elif outcome == "empty":
            counters.nreq_src_empty += 1
        elif outcome == "full":
            counters.nreq_target_full += 1
        if moved > self.max_moved_per_request:
            self.max_moved_per_request = moved

    def end_session(self) -> None:
        self.session_thief = NO_THIEF
        if self.session_pushed > self.max_moved_per_request:
            self.max_moved_per_request = self.session_pushed
        self.session_pushed = 0
        self.round += 1
        self.cells.write_round(self.worker, self.round)

    def redirect_push(self, idx: int) -> bool:
        """Try to divert a newly created task to the session thief.
        Returns True when the task went to the thief's ring; False ends or
        bypasses the session and the caller places the task normally."""
        thief = self.session_thief
        if thief == NO_THIEF:
            return False
        queues = self.queues
        if self.session_pushed >= self.config.n_steal:
            self.end_session()
            return False
        if queues.target_full(thief):
            self.counters.nreq_target_full += 1
            self.end_session()
            return False
        queues.push_to(thief, idx)
        self.session_pushed += 1
        counters = self.counters
        if not self.session_counted:
            counters.nreq_has_steal += 1
            self.session_counted = True
        if self.zone_of[thief] == self.my_zone:
            counters.ntasks_stolen_local += 1
        else:
            counters.ntasks_stolen_remote += 1
        return True
