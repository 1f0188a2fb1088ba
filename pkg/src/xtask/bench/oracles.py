"""Sequential reference computations the benchmark results are checked
against. None of these touch the task runtime."""

from __future__ import annotations

import numpy as np


def fib_seq(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def nqueens_count(n: int, cols: int = 0, diag1: int = 0, diag2: int = 0,
                  row: int = 0) -> int:
    """Bitmask backtracking count of all n-queens placements."""
    if row == n:
        return 1
    total = 0
    full = (1 << n) - 1
    free = full & ~(cols | diag1 | diag2)
    while free:
        bit = free & -free
        free -= bit
        total += nqueens_count(n, cols | bit, (diag1 | bit) << 1 & full,
                               (diag2 | bit) >> 1, row + 1)
    return total


def checksum(arr: np.ndarray) -> int:
    """Order-independent content hash: elementwise sum mod 2^64."""
    return int(np.sum(arr.astype(np.uint64, copy=False), dtype=np.uint64))


def is_sorted(arr: np.ndarray) -> bool:
    return bool(np.all(arr[:-1] <= arr[1:])) if len(arr) > 1 else True


def matmul_residual(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Max absolute deviation of c from the plain (non-Strassen) product."""
    return float(np.max(np.abs(c - a @ b)))
