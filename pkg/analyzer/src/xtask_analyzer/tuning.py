"""Steal-size computation and task-size-based tuning recommendations."""

from __future__ import annotations

import math
from dataclasses import dataclass


def steal_size(n_steal: int, n_victim: int, t_interval: int) -> float:
    """Aggregate stealing aggressiveness: n_steal * n_victim / log10(t_interval).

    The timeout's influence is deliberately compressed by the log because
    applications are far less sensitive to it than to the other two knobs.
    """
    if n_steal < 1 or n_victim < 1:
        raise ValueError("n_steal and n_victim must be >= 1")
    if t_interval <= 1:
        raise ValueError("steal size is undefined for t_interval <= 1")
    return (n_steal * n_victim) / math.log10(t_interval)


@dataclass(frozen=True)
class Recommendation:
    strategy: str                        # "WS" or "RP"
    p_local: tuple[float, float]         # recommended range
    steal_size: tuple[float, float]      # recommended range (upper may be inf)


# task-size buckets in timestamp cycles; boundaries resolve upward
_BUCKETS = (
    (1e2, Recommendation("WS", (1.0, 1.0), (1e0, 1e1))),
    (1e3, Recommendation("WS", (1.0, 1.0), (1e1, 1e2))),
    (10 ** 3.5, Recommendation("WS", (1.0, 1.0), (1e2, 10 ** 2.5))),
    (1e4, Recommendation("WS", (0.03, 0.50), (10 ** 2.5, 1e3))),
)
_LARGEST = Recommendation("RP", (0.03, 0.12), (1e3, math.inf))


def recommend_settings(task_size_cycles: float) -> Recommendation:
    """Strategy, locality, and steal-size guidance for a given task size."""
    if task_size_cycles <= 0:
        raise ValueError("task size must be positive")
    for upper, rec in _BUCKETS:
        if task_size_cycles < upper:
            return rec
    return _LARGEST
