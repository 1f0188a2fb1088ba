"""Protocol algebra for the lock-less steal handshake and both strategies,
driven single-process over fake queue endpoints."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xtask.dlb import (DlbCells, DlbConfig, DlbEngine, Strategy, decode_request,
                       encode_request, pick_victim, zone_blocks)
from xtask.layout import LINE
from xtask.profiling import CounterSet


def test_encode_examples():
    assert encode_request(5, 7) == 5_497_558_138_887
    assert encode_request(0, 1) == 1
    assert decode_request(0) == (0, 0)


def test_encode_rejects_out_of_range():
    with pytest.raises(ValueError):
        encode_request(1 << 24, 0)
    with pytest.raises(ValueError):
        encode_request(0, 1 << 40)
    with pytest.raises(ValueError):
        encode_request(-1, 0)


def test_encode_decode_roundtrip_10k():
    rnd = random.Random(42)
    for _ in range(10_000):
        t = rnd.randrange(1 << 24)
        r = rnd.randrange(1 << 40)
        assert decode_request(encode_request(t, r)) == (t, r)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, (1 << 24) - 1), st.integers(0, (1 << 40) - 1))
def test_encode_decode_roundtrip_property(t, r):
    assert decode_request(encode_request(t, r)) == (t, r)


def test_zone_blocks_contiguous():
    assert zone_blocks(8, 2) == [0, 0, 0, 0, 1, 1, 1, 1]
    assert zone_blocks(7, 3) == [0, 0, 0, 1, 1, 2, 2]
    assert zone_blocks(4, 1) == [0, 0, 0, 0]
    assert zone_blocks(4, 4) == [0, 1, 2, 3]
    with pytest.raises(ValueError):
        zone_blocks(4, 5)


def test_pick_victim_local_only():
    zone_of = zone_blocks(192, 8)     # zones of 24
    rnd = random.Random(0)
    for _ in range(500):
        v = pick_victim(30, zone_of, 1.0, rnd)
        assert 24 <= v <= 47 and v != 30


def test_pick_victim_remote_only():
    zone_of = zone_blocks(192, 8)
    rnd = random.Random(0)
    for _ in range(500):
        v = pick_victim(30, zone_of, 0.0, rnd)
        assert not 24 <= v <= 47


def test_pick_victim_never_self_two_workers():
    rnd = random.Random(3)
    for p in (0.0, 0.5, 1.0):
        for _ in range(200):
            assert pick_victim(0, [0, 0], p, rnd) == 1


def test_pick_victim_single_zone_remote_falls_back_local():
    rnd = random.Random(5)
    for _ in range(100):
        assert pick_victim(1, [0, 0, 0], 0.0, rnd) in (0, 2)


def test_pick_victim_locality_fraction():
    zone_of = zone_blocks(16, 4)
    rnd = random.Random(99)
    draws = 100_000
    local = 0
    me = 5
    for _ in range(draws):
        v = pick_victim(me, zone_of, 0.5, rnd)
        local += zone_of[v] == zone_of[me]
    frac = local / draws
    assert abs(frac - 0.5) <= 0.01


# ---- engine harness ---------------------------------------------------------

class FakeQueues:
    """Queue-matrix stand-in: a per-target capacity counter plus a local
    supply of stealable task ids."""

    def __init__(self, cap=8, supply=()):
        self.cap = cap
        self.pushed = {}            # target -> list of task ids
        self.supply = list(supply)

    def target_full(self, target):
        return len(self.pushed.get(target, [])) >= self.cap

    def push_to(self, target, idx):
        if self.target_full(target):
            return False
        self.pushed.setdefault(target, []).append(idx)
        return True

    def dequeue_next(self):
        return self.supply.pop(0) if self.supply else -1


def make_engine(worker=0, n=4, strategy=Strategy.NAWS, tap=None, **cfg_kw):
    words = [0] * (n * 2 * LINE)
    cells = DlbCells(words, 0, n * LINE, tap=tap)
    cfg = DlbConfig(strategy=strategy, **cfg_kw)
    queues = FakeQueues()
    counters = CounterSet()
    rng = random.Random(1)
    engines = [DlbEngine(w, DlbCells(words, 0, n * LINE, tap=tap), cfg,
                         zone_blocks(n, 1), rng, CounterSet(), FakeQueues())
               for w in range(n)]
    eng = engines[worker]
    eng.counters = counters
    eng.queues = queues
    eng.take = queues.dequeue_next
    return eng, engines, cells, counters, queues


def test_thief_writes_only_when_no_pending_request():
    eng, engines, cells, counters, _ = make_engine(worker=1, n=4, n_victim=1)
    # victim 0 fresh: round=1, request=0 -> embedded 0 < 1, write allowed
    sent = eng.thief_request_round()
    assert sent >= 0
    # force the deterministic example: round 3 vs embedded 2, then 3
    cells.write_round(0, 3)
    cells.write_request(0, encode_request(2, 2))
    req, rnd_cell = cells.read_request(0), cells.read_round(0)
    assert (req & ((1 << 40) - 1)) < rnd_cell
    cells.write_request(0, encode_request(1, 3))
    assert (cells.read_request(0) & ((1 << 40) - 1)) == 3  # now pending: no rewrite


def test_victim_ignores_stale_and_fresh_cells():
    eng, *_ = make_engine(worker=2, n=4)
    # fresh: request 0 embeds round 0, own round is 1
    assert not eng.handle_request()
    # stale: one behind
    eng.cells.write_request(2, encode_request(1, eng.round - 1))
    assert not eng.handle_request()
    assert eng.counters.nreq_handled == 0


def test_naws_valid_request_steals_and_advances_round():
    eng, _, cells, counters, queues = make_engine(worker=0, n=4,
                                                  strategy=Strategy.NAWS, n_steal=4)
    queues.supply = [10, 11, 12, 13, 14, 15]
    cells.write_request(0, encode_request(3, 1))
    assert eng.handle_request()
    assert eng.round == 2
    assert cells.read_round(0) == 2
    assert queues.pushed[3] == [10, 11, 12, 13]      # n_steal bound
    assert counters.nreq_handled == 1
    assert counters.nreq_has_steal == 1
    assert counters.ntasks_stolen_local == 4
    assert eng.max_moved_per_request == 4


def test_naws_source_empty_counts():
    eng, _, cells, counters, queues = make_engine(worker=0, strategy=Strategy.NAWS)
    cells.write_request(0, encode_request(2, 1))
    assert eng.handle_request()
    assert counters.nreq_src_empty == 1
    assert counters.nreq_has_steal == 0
    assert eng.round == 2


def test_naws_target_full_counts():
    eng, _, cells, counters, queues = make_engine(worker=0, strategy=Strategy.NAWS)
    queues.supply = [1, 2, 3]
    queues.pushed[2] = list(range(8))     # thief ring full
    cells.write_request(0, encode_request(2, 1))
    assert eng.handle_request()
    assert counters.nreq_target_full == 1
    assert queues.supply == [1, 2, 3]     # nothing popped with nowhere to push
    assert eng.round == 2


def test_naws_partial_steal_stops_at_source_exhaustion():
    eng, _, cells, counters, queues = make_engine(worker=0,
                                                  strategy=Strategy.NAWS, n_steal=32)
    queues.supply = [1, 2, 3, 4, 5]
    cells.write_request(0, encode_request(1, 1))
    eng.handle_request()
    assert queues.pushed[1] == [1, 2, 3, 4, 5]
    assert counters.nreq_has_steal == 1
    assert counters.ntasks_stolen_local == 5


def test_narp_session_redirects_up_to_nsteal_then_advances_round():
    eng, _, cells, counters, queues = make_engine(worker=0,
                                                  strategy=Strategy.NARP, n_steal=3)
    cells.write_request(0, encode_request(2, 1))
    assert eng.handle_request()
    assert eng.round == 1                  # deferred until the session ends
    assert eng.session_thief == 2
    assert eng.redirect_push(100)
    assert eng.redirect_push(101)
    assert eng.redirect_push(102)
    assert counters.ntasks_stolen_local == 3
    # quota reached: next push ends the session and places normally
    assert not eng.redirect_push(103)
    assert eng.session_thief == -1
    assert eng.round == 2
    assert cells.read_round(0) == 2
    assert queues.pushed[2] == [100, 101, 102]
    assert counters.nreq_has_steal == 1


def test_narp_target_full_ends_session():
    eng, _, cells, counters, queues = make_engine(worker=0,
                                                  strategy=Strategy.NARP, n_steal=8)
    cells.write_request(0, encode_request(3, 1))
    eng.handle_request()
    queues.pushed[3] = list(range(8))
    assert not eng.redirect_push(7)
    assert counters.nreq_target_full == 1
    assert eng.round == 2


def test_narp_single_session_at_a_time():
    eng, _, cells, counters, _ = make_engine(worker=0, strategy=Strategy.NARP)
    cells.write_request(0, encode_request(1, 1))
    assert eng.handle_request()
    # same still-valid request re-polled mid-session: not handled again
    assert not eng.handle_request()
    assert counters.nreq_handled == 1


def test_protocol_uses_only_word_loads_and_stores():
    tap = []
    eng, engines, cells, counters, queues = make_engine(worker=0, n=4, tap=tap,
                                                        strategy=Strategy.NAWS)
    thief = engines[1]
    thief.tap = tap
    thief.thief_request_round()
    eng.cells.tap = tap
    queues.supply = [5]
    eng.handle_request()
    kinds = {op for op, *_ in tap}
    assert kinds <= {"load", "store"}
    assert len(tap) > 0


def test_round_monotonic_over_many_requests():
    eng, _, cells, counters, queues = make_engine(worker=0, strategy=Strategy.NAWS)
    seen = [eng.round]
    for k in range(50):
        queues.supply = [k]
        cells.write_request(0, encode_request(1, eng.round))
        eng.handle_request()
        seen.append(eng.round)
    assert seen == sorted(seen)
    assert eng.round == 51
    assert counters.nreq_handled == 50
