"""Acceptance criterion 10: analyzer fidelity."""

import math

import pytest

from xtask_analyzer import parse_dump, recommend_settings, stats_table, steal_size

from conftest import write_dump


def test_criterion_10_analyzer_fidelity(tmp_path):
    # steal size reproduces the formula exactly on known configurations
    assert steal_size(32, 24, 1000) == 256.0
    assert steal_size(1, 1, 10_000) == 0.25
    assert steal_size(16, 24, 100_000) == pytest.approx(76.8)
    assert steal_size(8, 16, 10_000) == 32.0

    # all five task-size buckets
    assert recommend_settings(50) == recommend_settings(10)      # < 1e2
    assert recommend_settings(50).strategy == "WS"
    assert recommend_settings(50).steal_size == (1.0, 10.0)
    assert recommend_settings(300).steal_size == (10.0, 100.0)
    assert recommend_settings(2000).steal_size == (100.0, 10 ** 2.5)
    assert recommend_settings(5000).p_local == (0.03, 0.50)
    big = recommend_settings(1e5)
    assert big.strategy == "RP" and big.p_local == (0.03, 0.12)
    assert big.steal_size == (1000.0, math.inf)
    assert recommend_settings(1e4).strategy == "RP"   # boundary goes up

    # stats over ten dumps of one configuration match hand-computed means
    dumps = []
    for i in range(10):
        counters = {0: {"ntasks_self": 100 + i, "ntasks_local": 10,
                        "ntasks_remote": 5, "ntasks_static_push": 7,
                        "ntasks_imm_exec": 93 + i, "nreq_sent": 3 * i,
                        "nreq_handled": 2 * i, "nreq_has_steal": i,
                        "ntasks_stolen_local": 4 * i,
                        "ntasks_stolen_remote": i}}
        dumps.append(parse_dump(write_dump(str(tmp_path / f"d{i}"),
                                           n_workers=1, counters=counters)))
    table = stats_table(dumps)
    assert table["Self tasks"] == sum(100 + i for i in range(10)) / 10
    assert table["Req. sent"] == sum(3 * i for i in range(10)) / 10
    assert table["Req. w/ steal"] == 4.5
    assert table["Total steal"] == sum(5 * i for i in range(10)) / 10
    assert table["Local steal"] == sum(4 * i for i in range(10)) / 10
    print("ACCEPTANCE 10 analyzer fidelity: PASS  "
          "[steal size exact; five buckets; 10-dump means to machine precision]",
          flush=True)
