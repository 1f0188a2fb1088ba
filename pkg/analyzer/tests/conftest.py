import os

import pytest

KINDS = ("TASK", "TASK_CREATE", "TASKWAIT", "BARRIER", "STALL")


def write_dump(directory, n_workers=2, wall=10_000, benchmark="fib",
               events=None, counters=None):
    """Fabricate a dump directory in the documented format."""
    os.makedirs(directory, exist_ok=True)
    events = events if events is not None else {}
    counters = counters if counters is not None else {}
    with open(os.path.join(directory, "manifest.txt"), "w") as f:
        f.write(f"n_workers={n_workers}\n")
        f.write("zones=1\n")
        f.write("ticks_per_second=1000000000\n")
        f.write("dlb_strategy=na-ws\n")
        f.write("dlb_n_victim=4\ndlb_n_steal=8\ndlb_t_interval=64\ndlb_p_local=1.0\n")
        f.write("queue_capacity=16\n")
        f.write(f"wall_time_ticks={wall}\n")
        f.write(f"benchmark={benchmark}\n")
        f.write("benchmark_args=n=10\n")
        f.write("clock_overhead_ticks=80.0\n")
    for w in range(n_workers):
        with open(os.path.join(directory, f"events_{w}.csv"), "w") as f:
            f.write("worker_id,kind,start_ticks,end_ticks\n")
            for kind, start, end in events.get(w, []):
                f.write(f"{w},{kind},{start},{end}\n")
        with open(os.path.join(directory, f"counters_{w}.csv"), "w") as f:
            f.write("counter,value\n")
            for name, value in counters.get(w, {}).items():
                f.write(f"{name},{value}\n")
    return directory


@pytest.fixture
def make_dump(tmp_path):
    made = [0]

    def _make(**kw):
        made[0] += 1
        return write_dump(str(tmp_path / f"dump{made[0]}"), **kw)

    return _make
