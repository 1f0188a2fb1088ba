import os

import pytest

from xtask_analyzer import DumpError, parse_dump


def test_parse_roundtrip(make_dump):
    d = make_dump(n_workers=4,
                  events={0: [("TASK", 0, 500)], 3: [("STALL", 100, 300)]},
                  counters={w: {"ntasks_self": w} for w in range(4)})
    dump = parse_dump(d)
    assert dump.n_workers == 4
    assert len(dump.events) == 4
    assert dump.events[0] == [("TASK", 0, 500)]
    assert dump.events[1] == []
    assert dump.counter_total("ntasks_self") == 0 + 1 + 2 + 3
    assert dump.manifest["dlb_strategy"] == "na-ws"


def test_missing_manifest_is_hard_error(tmp_path):
    with pytest.raises(DumpError, match="manifest"):
        parse_dump(str(tmp_path))


def test_missing_worker_file_is_hard_error(make_dump):
    d = make_dump(n_workers=2)
    os.unlink(os.path.join(d, "events_1.csv"))
    with pytest.raises(DumpError, match="events_1.csv"):
        parse_dump(d)


def test_truncated_row_names_file_and_line(make_dump):
    d = make_dump(n_workers=1)
    path = os.path.join(d, "events_0.csv")
    with open(path, "a") as f:
        f.write("0,TASK,123\n")
    with pytest.raises(DumpError, match=r"events_0\.csv:2"):
        parse_dump(d)


def test_timestamps_outside_wall_rejected(make_dump):
    d = make_dump(n_workers=1, wall=100, events={0: [("TASK", 50, 200)]})
    with pytest.raises(DumpError, match="outside"):
        parse_dump(d)


def test_bad_counter_value_rejected(make_dump):
    d = make_dump(n_workers=1)
    with open(os.path.join(d, "counters_0.csv"), "a") as f:
        f.write("ntasks_self,lots\n")
    with pytest.raises(DumpError, match=r"counters_0\.csv:2"):
        parse_dump(d)
