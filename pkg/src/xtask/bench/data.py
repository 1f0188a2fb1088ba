"""Shared-memory arrays owned by a benchmark, outliving the worker team."""

from __future__ import annotations

from multiprocessing import shared_memory

import numpy as np


class SharedArray:
    """A numpy array over its own shared-memory segment. Created before the
    team forks so every worker sees the same pages; the owner closes it
    after verification."""

    def __init__(self, dtype, shape):
        dtype = np.dtype(dtype)
        size = int(np.prod(shape)) * dtype.itemsize
        self.shm = shared_memory.SharedMemory(create=True, size=max(size, 8))
        self.arr = np.frombuffer(self.shm.buf, dtype=dtype,
                                 count=int(np.prod(shape))).reshape(shape)

    def close(self) -> None:
        self.arr = None
        try:
            self.shm.close()
        except BufferError:
            pass
        try:
            self.shm.unlink()
        except FileNotFoundError:
            pass
