"""xtask: a task-parallel runtime built on a lock-less queue matrix.

Workers are forked processes over one shared-memory segment. Each worker
owns a row of single-producer single-consumer rings, tasks place
round-robin starting at the creator's master queue, a distributed tree
barrier ends the team, and idle workers recover imbalance through a
lock-less request/round handshake driving either work stealing or
redirect push.

    from xtask import TeamConfig, team_run, task_fn

    @task_fn
    def hello(ctx):
        print("hi from worker", ctx.worker_id)

    team_run(TeamConfig(n_workers=4), hello)
"""

from .dlb import DlbConfig, Strategy, decode_request, encode_request, pick_victim, zone_blocks
from .profiling import CounterSet, dump, timestamp_now
from .runtime import TaskContext, TeamConfig, TeamError, TeamReport, team_run
from .tasks import task_fn

__all__ = [
    "CounterSet", "DlbConfig", "Strategy", "TaskContext", "TeamConfig",
    "TeamError", "TeamReport", "decode_request", "dump", "encode_request",
    "pick_victim", "task_fn", "team_run", "timestamp_now", "zone_blocks",
]

__version__ = "0.1.0"
