import numpy as np
import pytest

from xtask import DlbConfig, Strategy, TeamConfig

ALL_STRATEGIES = (Strategy.SLB, Strategy.NARP, Strategy.NAWS)


def small_team(n_workers=2, strategy=Strategy.NAWS, **kw):
    """A quick-starting team config for functional tests."""
    dlb = kw.pop("dlb", None) or DlbConfig(strategy=strategy, n_victim=4,
                                           n_steal=8, t_interval=64)
    defaults = dict(
        queue_capacity=16,
        arena_records=4096,
        scratch_i64_words=1 << 12,
        watchdog_s=30.0,
    )
    defaults.update(kw)
    return TeamConfig(n_workers=n_workers, dlb=dlb, **defaults)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
