"""Task-parallel benchmark kernels.

Each kernel follows the classic fork-join shape: recursion spawns child
tasks above a serial cutoff and computes directly below it, with taskwait
joins. Node results travel through the team's shared scratch; bulk data
(arrays to sort, matrices, hash records) lives in benchmark-owned shared
arrays so any worker can operate on it and the result survives the team.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

from ..profiling import timestamp_now
from ..tasks import task_fn


# ---- fib -------------------------------------------------------------------

def _fib_serial(n: int) -> int:
    # same exponential recursion the tasks would do, just unspawned
    if n < 2:
        return n
    return _fib_serial(n - 1) + _fib_serial(n - 2)


@task_fn
def fib_node(ctx, n, cutoff, out):
    if n < cutoff:
        ctx.i64[out] = _fib_serial(n)
        return
    s = ctx.alloc_i64(2)
    ctx.spawn(fib_node, n - 1, cutoff, s)
    ctx.spawn(fib_node, n - 2, cutoff, s + 1)
    ctx.taskwait()
    ctx.i64[out] = ctx.i64[s] + ctx.i64[s + 1]


@task_fn
def fib_root(ctx, n, cutoff):
    s = ctx.alloc_i64(1)
    ctx.spawn(fib_node, n, cutoff, s)
    ctx.taskwait()
    ctx.user.res.arr[0] = ctx.i64[s]


# ---- nqueens ---------------------------------------------------------------

def _nqueens_serial(n, cols, diag1, diag2, row):
    if row == n:
        return 1
    total = 0
    full = (1 << n) - 1
    free = full & ~(cols | diag1 | diag2)
    while free:
        bit = free & -free
        free -= bit
        total += _nqueens_serial(n, cols | bit, (diag1 | bit) << 1 & full,
                                 (diag2 | bit) >> 1, row + 1)
    return total


@task_fn
def nqueens_node(ctx, n, depth_cutoff, out, row, cols, diag1, diag2):
    if row >= depth_cutoff:
        ctx.i64[out] = _nqueens_serial(n, cols, diag1, diag2, row)
        return
    full = (1 << n) - 1
    free = full & ~(cols | diag1 | diag2)
    bits = []
    while free:
        bit = free & -free
        free -= bit
        bits.append(bit)
    if not bits:
        ctx.i64[out] = 0
        return
    s = ctx.alloc_i64(len(bits))
    for i, bit in enumerate(bits):
        ctx.spawn(nqueens_node, n, depth_cutoff, s + i, row + 1,
                  cols | bit, (diag1 | bit) << 1 & full, (diag2 | bit) >> 1)
    ctx.taskwait()
    ctx.i64[out] = int(np.sum(ctx.i64[s:s + len(bits)]))


@task_fn
def nqueens_root(ctx, n, depth_cutoff):
    s = ctx.alloc_i64(1)
    ctx.spawn(nqueens_node, n, depth_cutoff, s, 0, 0, 0, 0)
    ctx.taskwait()
    ctx.user.res.arr[0] = ctx.i64[s]


# ---- msort -----------------------------------------------------------------

def _merge_sorted(arr, tmp, lo, mid, hi):
    a = arr[lo:mid]
    b = arr[mid:hi]
    out = tmp[lo:hi]
    pos_b = np.searchsorted(a, b, side="right") + np.arange(len(b))
    mask = np.ones(hi - lo, dtype=bool)
    mask[pos_b] = False
    out[pos_b] = b
    out[mask] = a
    arr[lo:hi] = out


@task_fn
def msort_node(ctx, lo, hi, cutoff):
    arr = ctx.user.arr.arr
    if hi - lo <= cutoff:
        arr[lo:hi].sort()
        return
    mid = (lo + hi) // 2
    ctx.spawn(msort_node, lo, mid, cutoff)
    ctx.spawn(msort_node, mid, hi, cutoff)
    ctx.taskwait()
    _merge_sorted(arr, ctx.user.tmp.arr, lo, mid, hi)


@task_fn
def msort_root(ctx, n, cutoff):
    ctx.spawn(msort_node, 0, n, cutoff)
    ctx.taskwait()


# ---- strassen --------------------------------------------------------------

def _strassen_operands(A, B):
    """The seven Strassen products' left/right operands."""
    h = A.shape[0] // 2
    A11, A12 = A[:h, :h], A[:h, h:]
    A21, A22 = A[h:, :h], A[h:, h:]
    B11, B12 = B[:h, :h], B[:h, h:]
    B21, B22 = B[h:, :h], B[h:, h:]
    return ((A11 + A22, B11 + B22),
            (A21 + A22, B11),
            (A11, B12 - B22),
            (A22, B21 - B11),
            (A11 + A12, B22),
            (A21 - A11, B11 + B12),
            (A12 - A22, B21 + B22))


def _strassen_combine(C, M):
    h = C.shape[0] // 2
    M1, M2, M3, M4, M5, M6, M7 = M
    C[:h, :h] = M1 + M4 - M5 + M7
    C[:h, h:] = M3 + M5
    C[h:, :h] = M2 + M4
    C[h:, h:] = M1 - M2 + M3 + M6


def _spawn_strassen(ctx, A, B, C, n, cutoff):
    """Materialize operand blocks in team scratch, run the seven products
    as child tasks, and combine into C. Caller owns A, B, C views."""
    h = n // 2
    hh = h * h
    base = ctx.alloc_f64(21 * hh)
    f64 = ctx.f64
    offs = []
    for i, (L, R) in enumerate(_strassen_operands(A, B)):
        lo = base + 3 * i * hh
        f64[lo:lo + hh] = L.reshape(-1)
        f64[lo + hh:lo + 2 * hh] = R.reshape(-1)
        offs.append(lo)
        ctx.spawn(strassen_mult, lo, lo + hh, lo + 2 * hh, h, cutoff)
    ctx.taskwait()
    M = [f64[o + 2 * hh:o + 3 * hh].reshape(h, h) for o in offs]
    _strassen_combine(C, M)


@task_fn
def strassen_mult(ctx, a_off, b_off, c_off, n, cutoff):
    f64 = ctx.f64
    A = f64[a_off:a_off + n * n].reshape(n, n)
    B = f64[b_off:b_off + n * n].reshape(n, n)
    C = f64[c_off:c_off + n * n].reshape(n, n)
    if n <= cutoff:
        np.matmul(A, B, out=C)
        return
    _spawn_strassen(ctx, A, B, C, n, cutoff)


@task_fn
def strassen_root(ctx, n, cutoff):
    u = ctx.user
    A, B, C = u.a.arr, u.b.arr, u.c.arr
    if n <= cutoff:
        np.matmul(A, B, out=C)
        return
    _spawn_strassen(ctx, A, B, C, n, cutoff)


# ---- synthetic imbalance ----------------------------------------------------

def _spin(dur_ns):
    end = timestamp_now() + dur_ns
    while timestamp_now() < end:
        pass


@task_fn
def spin_task(ctx, dur_ns):
    _spin(dur_ns)
    ctx.user.done.arr[ctx.worker_id] += 1


@task_fn
def imbalance_gen(ctx, count, dur_ns, gap_ns):
    # a creator works between creations; its round-robin self-share piles
    # up in its master queue, which only it can drain without stealing
    for _ in range(count):
        ctx.spawn(spin_task, dur_ns)
        if gap_ns:
            _spin(gap_ns)
    ctx.taskwait()


@task_fn
def imbalance_root(ctx, heavy_quota, light_quota, n_heavy, dur_ns, gap_ns):
    # one generator lands on each worker: the round-robin cycle covers
    # every id exactly once while the rings are empty
    for w in range(ctx.n_workers):
        quota = heavy_quota if w < n_heavy else light_quota
        ctx.spawn(imbalance_gen, quota, dur_ns, gap_ns)
    ctx.taskwait()


def imbalance_quotas(n_workers: int, n_tasks: int, skew: float,
                     heavy_frac: float) -> tuple[int, int, int]:
    """Task quotas so the heavy creators carry skew + (1-skew) * (their
    fair share) of all spin tasks."""
    n_heavy = max(1, round(heavy_frac * n_workers))
    if n_heavy >= n_workers or n_tasks == 0:
        per = n_tasks // max(n_workers, 1)
        return per, per, min(n_heavy, n_workers)
    share = skew + (1.0 - skew) * (n_heavy / n_workers)
    heavy_quota = int(round(n_tasks * share / n_heavy))
    light_quota = int(round(n_tasks * (1.0 - share) / (n_workers - n_heavy)))
    return heavy_quota, light_quota, n_heavy


# ---- hash bucket filling -----------------------------------------------------

RECORD_BYTES = 32
DIGEST_BYTES = 28


def _hash_blake2(data: bytes) -> bytes:
    return hashlib.blake2b(data, digest_size=DIGEST_BYTES).digest()


def _hash_sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()[:DIGEST_BYTES]


def _hash_mix64(data: bytes) -> bytes:
    # splitmix64 chain: fast, stateless, decidedly not cryptographic
    x = int.from_bytes(data, "little")
    out = b""
    for _ in range(4):
        x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
        out += struct.pack("<Q", z ^ (z >> 31))
    return out[:DIGEST_BYTES]


HASH_ALGOS = {"blake2": _hash_blake2, "sha256": _hash_sha256, "mix64": _hash_mix64}


@task_fn
def hash_batch(ctx, start, count):
    u = ctx.user
    hash_fn = HASH_ALGOS[u.hash_name]
    buf = u.records_mv            # raw bytes view: per-record numpy cost is too high
    off = start * RECORD_BYTES
    for nonce in range(start, start + count):
        nb = nonce.to_bytes(4, "little")
        buf[off:off + DIGEST_BYTES] = hash_fn(nb)
        buf[off + DIGEST_BYTES:off + RECORD_BYTES] = nb
        off += RECORD_BYTES
    u.filled.arr[ctx.worker_id] += count


@task_fn
def hash_root(ctx, total, batch):
    nonce = 0
    while nonce < total:
        count = batch if nonce + batch <= total else total - nonce
        ctx.spawn(hash_batch, nonce, count)
        nonce += count
    ctx.taskwait()
