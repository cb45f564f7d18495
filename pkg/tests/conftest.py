import numpy as np
import pytest

from cellmatch.channel import realize
from cellmatch.config import ScenarioConfig
from cellmatch.preference import build_user_preferences

ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)


def random_instance(seed: int, max_users=20, max_bs=5, max_subcarriers=4, thresholds=(0.0, 0.25, 0.5, 1.0, 2.0)):
    """Small random scenario with mixed list lengths; returns (config, channel, profile)."""
    rng = np.random.default_rng([seed, 99])
    num_bs = int(rng.integers(1, max_bs + 1))
    cfg = ScenarioConfig(
        num_bs=num_bs,
        num_users=int(rng.integers(0, max_users + 1)),
        num_subcarriers=int(rng.integers(1, max_subcarriers + 1)),
        quotas=tuple(int(q) for q in rng.integers(1, 5, size=num_bs)),
        rate_threshold=float(rng.choice(thresholds)),
        area_side=float(rng.choice([100.0, 1000.0])),
    )
    _, channel = realize(cfg, np.random.default_rng(seed))
    return cfg, channel, build_user_preferences(channel.avg_rates, cfg.rate_threshold)


def textbook_da(lists, rates, quotas):
    """Sequential user-proposing Gale-Shapley, one free user at a time."""
    nxt = [0] * len(lists)
    held = [[] for _ in quotas]
    free = [m for m in range(len(lists)) if lists[m]]
    while free:
        m = free.pop(0)
        l = lists[m][nxt[m]]
        nxt[m] += 1
        held[l].append(m)
        if len(held[l]) > quotas[l]:
            worst = min(held[l], key=lambda u: (rates[l, u], -u))
            held[l].remove(worst)
            if nxt[worst] < len(lists[worst]):
                free.append(worst)
    out = [None] * len(lists)
    for l, users in enumerate(held):
        for m in users:
            out[m] = l
    return tuple(out)


@pytest.fixture
def small_config():
    return ScenarioConfig(num_bs=3, num_users=5, num_subcarriers=2, area_side=200.0)
