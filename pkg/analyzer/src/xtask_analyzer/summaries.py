"""Per-worker timeline decomposition and cross-run statistics tables."""

from __future__ import annotations

import csv

import numpy as np

from .parse import DumpError, RunDump

STATE_KINDS = ("TASK", "TASK_CREATE", "TASKWAIT", "BARRIER", "STALL")

STATE_COLORS = {
    "TASK": "#2ca02c",          # tasking: green
    "TASK_CREATE": "#1f77b4",   # creation: blue
    "TASKWAIT": "#ffbf00",      # waiting: yellow
    "BARRIER": "#d62728",       # barrier: red
    "STALL": "#9e9e9e",         # stall: grey
}

# row label -> counter(s) summed per dump
TABLE_ROWS = (
    ("Self tasks", ("ntasks_self",)),
    ("Local tasks", ("ntasks_local",)),
    ("Remote tasks", ("ntasks_remote",)),
    ("Static push", ("ntasks_static_push",)),
    ("Imm. exec", ("ntasks_imm_exec",)),
    ("Req. sent", ("nreq_sent",)),
    ("Req. handled", ("nreq_handled",)),
    ("Req. w/ steal", ("nreq_has_steal",)),
    ("Total steal", ("ntasks_stolen_local", "ntasks_stolen_remote")),
    ("Local steal", ("ntasks_stolen_local",)),
)


def timeline_summary(dump: RunDump) -> np.ndarray:
    """Ticks per worker per state, shape (n_workers, len(STATE_KINDS))."""
    table = np.zeros((dump.n_workers, len(STATE_KINDS)), dtype=np.int64)
    index = {k: i for i, k in enumerate(STATE_KINDS)}
    for worker, events in enumerate(dump.events):
        for kind, start, end in events:
            col = index.get(kind)
            if col is None:
                raise DumpError(f"{dump.directory}: unknown event kind {kind!r}")
            table[worker, col] += end - start
    return table


def save_timeline(dump: RunDump, out_base: str) -> list[str]:
    """Write <out_base>.csv and <out_base>.png; the numbers always exist
    even where the image tooling does not."""
    table = timeline_summary(dump)
    csv_path = out_base + ".csv"
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["worker_id", *(k.lower() + "_ticks" for k in STATE_KINDS)])
        for w in range(dump.n_workers):
            writer.writerow([w, *table[w].tolist()])
    written = [csv_path]

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(9, max(2.0, 0.45 * dump.n_workers + 1)))
    y = np.arange(dump.n_workers)
    left = np.zeros(dump.n_workers)
    for col, kind in enumerate(STATE_KINDS):
        vals = table[:, col] / dump.manifest["ticks_per_second"]
        ax.barh(y, vals, left=left, label=kind.lower(), height=0.7,
                color=STATE_COLORS[kind])
        left += vals
    ax.set_yticks(y)
    ax.set_ylabel("worker id")
    ax.set_xlabel("time (s)")
    bench = dump.manifest.get("benchmark", "")
    ax.set_title(f"per-worker timeline {bench}".strip())
    ax.legend(loc="lower right", fontsize=8)
    ax.invert_yaxis()
    fig.tight_layout()
    png_path = out_base + ".png"
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    written.append(png_path)
    return written


def stats_table(dumps: list[RunDump], spread: bool = False) -> dict:
    """Mean of each statistics row across dumps of one configuration.

    With spread=True each value becomes (mean, min, max). Dumps from
    different benchmarks cannot be averaged together.
    """
    if not dumps:
        raise ValueError("need at least one dump")
    benchmarks = {d.manifest.get("benchmark", "") for d in dumps}
    if len(benchmarks) > 1:
        raise DumpError(f"dumps mix benchmarks {sorted(benchmarks)}: refusing to average")
    out = {}
    for label, counters in TABLE_ROWS:
        values = [sum(d.counter_total(c) for c in counters) for d in dumps]
        mean = sum(values) / len(values)
        out[label] = (mean, min(values), max(values)) if spread else mean
    return out


def write_stats_csv(table: dict, path: str) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        if table and isinstance(next(iter(table.values())), tuple):
            writer.writerow(["statistic", "mean", "min", "max"])
            for label, (mean, lo, hi) in table.items():
                writer.writerow([label, f"{mean:.1f}", lo, hi])
        else:
            writer.writerow(["statistic", "mean"])
            for label, mean in table.items():
                writer.writerow([label, f"{mean:.1f}"])
