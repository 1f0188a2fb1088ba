"""Task records, payload packing, and the record pool."""

from multiprocessing import shared_memory

import pytest

from xtask.layout import R_SF, TeamLayout
from xtask.tasks import RecordPool, TaskArena, fn_id, pack_args, task_fn


def test_task_fn_assigns_stable_ids():
    @task_fn
    def a(ctx):
        pass

    @task_fn
    def b(ctx):
        pass

    assert fn_id(b) == fn_id(a) + 1


def test_fn_id_rejects_unregistered():
    with pytest.raises(TypeError):
        fn_id(lambda ctx: None)


def test_pack_args_roundtrip_limit():
    assert pack_args((), 16) == b""
    blob = pack_args((1, 2, 3), 64)
    import marshal
    assert marshal.loads(blob) == (1, 2, 3)
    with pytest.raises(ValueError):
        pack_args(tuple(range(100)), 16)


@pytest.fixture
def arena():
    lay = TeamLayout.build(3, 4, arena_records=8, payload_bytes=32,
                           scratch_i64_words=0, scratch_f64_words=0)
    shm = shared_memory.SharedMemory(create=True, size=lay.total_bytes)
    mv = memoryview(shm.buf)
    q = mv.cast("q")
    a = TaskArena(q, mv, lay)
    yield a, q
    q.release()
    mv.release()
    shm.close()
    shm.unlink()


def test_record_init_and_read(arena):
    a, q = arena
    base = a.init_record(2, fid=7, parent_idx=0, creator=1,
                         payload=pack_args((5, 9), 32))
    assert a.fn_of(base) == 7
    assert a.creator_of(base) == 1
    assert a.read_args(base) == (5, 9)
    assert a.children_done(base) == 0
    assert not a.quiescent(base)
    q[base + R_SF] = 1                  # finished, no children
    assert a.quiescent(base)
    q[base + R_SF] = (2 << 1) | 1       # finished, two children outstanding
    assert not a.quiescent(base)


def test_record_reuse_resets_stripes(arena):
    a, q = arena
    base = a.init_record(1, fid=0, parent_idx=0, creator=0, payload=b"")
    from xtask.layout import R_DONEBASE
    q[base + R_DONEBASE] = 3      # stripe for worker 0
    a.init_record(1, fid=0, parent_idx=0, creator=0, payload=b"")
    assert a.children_done(base) == 0


def test_pool_ownership_cycle():
    pool = RecordPool(range(1, 4))
    got = {pool.alloc() for _ in range(3)}
    assert got == {1, 2, 3}
    assert pool.alloc() == -1
    pool.release(2)
    assert pool.alloc() == 2
