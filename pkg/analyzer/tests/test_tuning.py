import math

import pytest

from xtask_analyzer import recommend_settings, steal_size


def test_steal_size_known_values():
    assert steal_size(32, 24, 1000) == 256.0
    assert steal_size(1, 1, 10_000) == 0.25
    assert steal_size(16, 24, 100_000) == pytest.approx(76.8)


def test_steal_size_rejects_degenerate():
    with pytest.raises(ValueError):
        steal_size(32, 24, 1)
    with pytest.raises(ValueError):
        steal_size(32, 24, 0)
    with pytest.raises(ValueError):
        steal_size(0, 24, 100)


def test_recommend_tiny_tasks():
    rec = recommend_settings(50)
    assert rec.strategy == "WS"
    assert rec.p_local == (1.0, 1.0)
    assert rec.steal_size == (1.0, 10.0)


def test_recommend_each_bucket():
    assert recommend_settings(99).steal_size == (1.0, 10.0)
    assert recommend_settings(100).steal_size == (10.0, 100.0)
    assert recommend_settings(999).steal_size == (10.0, 100.0)
    assert recommend_settings(1000).steal_size == (100.0, 10 ** 2.5)
    mid = recommend_settings(10 ** 3.5)
    assert mid.strategy == "WS"
    assert mid.p_local == (0.03, 0.50)
    big = recommend_settings(1e5)
    assert big.strategy == "RP"
    assert big.p_local == (0.03, 0.12)
    assert big.steal_size == (1000.0, math.inf)


def test_boundary_ten_thousand_resolves_upward():
    assert recommend_settings(1e4).strategy == "RP"
    assert recommend_settings(1e4 - 1).strategy == "WS"


def test_recommend_rejects_nonpositive():
    with pytest.raises(ValueError):
        recommend_settings(0)
