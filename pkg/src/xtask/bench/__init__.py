"""Benchmark kernels and the xtask-bench command line harness."""

from .harness import BenchReport, BenchSpec, run_experiment
from .oracles import checksum, fib_seq, nqueens_count

__all__ = ["BenchReport", "BenchSpec", "run_experiment",
           "checksum", "fib_seq", "nqueens_count"]
