"""Reading and validating one profiler dump directory."""

from __future__ import annotations

import os
from dataclasses import dataclass, field


class DumpError(ValueError):
    pass


_INT_KEYS = {"n_workers", "zones", "ticks_per_second", "wall_time_ticks",
             "queue_capacity", "dlb_n_victim", "dlb_n_steal", "dlb_t_interval"}
_FLOAT_KEYS = {"dlb_p_local", "clock_overhead_ticks"}


@dataclass
class RunDump:
    directory: str
    manifest: dict
    events: list[list[tuple[str, int, int]]] = field(default_factory=list)
    counters: list[dict[str, int]] = field(default_factory=list)

    @property
    def n_workers(self) -> int:
        return self.manifest["n_workers"]

    @property
    def wall_ticks(self) -> int:
        return self.manifest["wall_time_ticks"]

    def counter_total(self, name: str) -> int:
        return sum(c.get(name, 0) for c in self.counters)


def _parse_manifest(path: str) -> dict:
    manifest = {}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            if "=" not in line:
                raise DumpError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            if key in _INT_KEYS:
                value = int(value)
            elif key in _FLOAT_KEYS:
                value = float(value)
            manifest[key] = value
    for key in ("n_workers", "wall_time_ticks", "ticks_per_second"):
        if key not in manifest:
            raise DumpError(f"{path}: manifest is missing {key}")
    return manifest


def _parse_events(path: str, worker: int, wall: int):
    events = []
    with open(path) as f:
        header = f.readline().strip()
        if header != "worker_id,kind,start_ticks,end_ticks":
            raise DumpError(f"{path}:1: unexpected header {header!r}")
        for lineno, line in enumerate(f, 2):
            parts = line.strip().split(",")
            if len(parts) != 4:
                raise DumpError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
            try:
                wid, kind, start, end = int(parts[0]), parts[1], int(parts[2]), int(parts[3])
            except ValueError as exc:
                raise DumpError(f"{path}:{lineno}: {exc}") from None
            if wid != worker:
                raise DumpError(f"{path}:{lineno}: worker id {wid} in file for {worker}")
            if end < start:
                raise DumpError(f"{path}:{lineno}: end before start")
            if start < 0 or end > wall:
                raise DumpError(f"{path}:{lineno}: timestamps outside [0, {wall}]")
            events.append((kind, start, end))
    return events


def _parse_counters(path: str):
    counters = {}
    with open(path) as f:
        header = f.readline().strip()
        if header != "counter,value":
            raise DumpError(f"{path}:1: unexpected header {header!r}")
        for lineno, line in enumerate(f, 2):
            parts = line.strip().split(",")
            if len(parts) != 2:
                raise DumpError(f"{path}:{lineno}: expected 2 fields, got {len(parts)}")
            try:
                counters[parts[0]] = int(parts[1])
            except ValueError:
                raise DumpError(f"{path}:{lineno}: non-integer value {parts[1]!r}") from None
    return counters


def parse_dump(directory: str) -> RunDump:
    """Load and validate one dump directory; raises DumpError with the
    offending file and line on anything malformed."""
    manifest_path = os.path.join(directory, "manifest.txt")
    if not os.path.exists(manifest_path):
        raise DumpError(f"{directory}: no manifest.txt (is this a dump directory?)")
    manifest = _parse_manifest(manifest_path)
    dump = RunDump(directory=directory, manifest=manifest)
    wall = manifest["wall_time_ticks"]
    for w in range(manifest["n_workers"]):
        epath = os.path.join(directory, f"events_{w}.csv")
        cpath = os.path.join(directory, f"counters_{w}.csv")
        for p in (epath, cpath):
            if not os.path.exists(p):
                raise DumpError(f"{directory}: missing {os.path.basename(p)}")
        dump.events.append(_parse_events(epath, w, wall))
        dump.counters.append(_parse_counters(cpath))
    return dump
