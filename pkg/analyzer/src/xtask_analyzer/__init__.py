"""Offline analysis of xtask profiler dumps.

Consumes the runtime's dump directory format (events_<id>.csv,
counters_<id>.csv, manifest.txt) and produces per-worker timeline
summaries, mean statistics tables across repeated runs, and tuning
recommendations derived from steal size and task size.
"""

from .parse import DumpError, RunDump, parse_dump
from .summaries import STATE_KINDS, TABLE_ROWS, stats_table, timeline_summary
from .tuning import Recommendation, recommend_settings, steal_size

__all__ = ["DumpError", "Recommendation", "RunDump", "STATE_KINDS",
           "TABLE_ROWS", "parse_dump", "recommend_settings", "stats_table",
           "steal_size", "timeline_summary"]

__version__ = "0.1.0"
