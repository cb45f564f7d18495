"""Association procedures: priority-based DA, classical DA and max-RSSI."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .channel import ChannelRealization
from .config import ScenarioConfig
from .matching import Matching
from .preference import (
    Applicant,
    PreferenceProfile,
    bs_rankings,
    chance_flag,
    classify_priority,
    psi_table,
    rank_and_select,
)


@dataclass
class RunResult:
    matching: Matching
    rounds: int
    proposals_sent: int
    per_round_log: Optional[list[dict]] = field(default=None)


# (bs, [(user, remaining list)], quota) -> (accepted users, rejected users)
Selector = Callable[[int, list, int], tuple[list[int], list[int]]]


def _deferred_acceptance(profile: PreferenceProfile, quotas, select: Selector, trace: bool) -> RunResult:
    lists = profile.user_lists
    n_bs = profile.num_bs
    pointer = [0] * profile.num_users
    held: list[list[int]] = [[] for _ in range(n_bs)]
    active = [m for m, chi in enumerate(lists) if chi]
    log = [] if trace else None
    rounds = proposals_sent = 0

    while active:
        rounds += 1
        proposals: dict[int, list[int]] = {}
        for m in active:
            proposals.setdefault(lists[m][pointer[m]], []).append(m)
        proposals_sent += len(active)

        rejected: list[tuple[int, int]] = []
        for l in sorted(proposals):
            pool = [(m, lists[m][pointer[m]:]) for m in held[l] + proposals[l]]
            accepted, out = select(l, pool, quotas[l])
            held[l] = accepted
            rejected.extend((m, l) for m in out)

        active, dropped = [], []
        for m, _ in rejected:
            pointer[m] += 1
            (active if pointer[m] < len(lists[m]) else dropped).append(m)
        active.sort()

        if log is not None:
            log.append({
                "round": rounds,
                "proposals": sorted([m, l] for l, ms in proposals.items() for m in ms),
                "rejections": sorted([m, l] for m, l in rejected),
                "held": [len(h) for h in held],
                "unmatched": sorted(dropped),
            })

    assignment: list[Optional[int]] = [None] * profile.num_users
    for l, users in enumerate(held):
        for m in users:
            assignment[m] = l
    return RunResult(Matching.from_assignment(assignment, n_bs), rounds, proposals_sent, log)


def pda_fixed_selector(profile: PreferenceProfile, channel: ChannelRealization,
                       config: ScenarioConfig) -> Selector:
    positions = bs_rankings(profile, psi_table(channel, config))

    def select(l, pool, quota):
        order = sorted((m for m, _ in pool), key=positions[l].__getitem__)
        return order[:quota], order[quota:]
    return select


def pda_pool_selector(profile: PreferenceProfile, channel: ChannelRealization, config: ScenarioConfig) -> Selector:
    psi = psi_table(channel, config)
    rates = channel.avg_rates
    lists = profile.user_lists

    def select(l, pool, quota):
        applicants = []
        for m, remaining in pool:
            c = classify_priority(l, lists[m][0], chance_flag(remaining, l))
            applicants.append(Applicant(m, c, float(rates[l, m]), float(psi[c, l, m]), remaining))
        accepted, rejected = rank_and_select(applicants, quota)
        return [a.user_id for a in accepted], [a.user_id for a in rejected]
    return select


def rate_selector(rates: np.ndarray) -> Selector:
    def select(l, pool, quota):
        order = sorted((m for m, _ in pool), key=lambda m: (-rates[l, m], m))
        return order[:quota], order[quota:]
    return select


def run_pda(profile: PreferenceProfile, channel: ChannelRealization, config: ScenarioConfig,
            trace: bool = False, ranking: str = "fixed") -> RunResult:
    """Priority-based deferred acceptance.

    Active users propose simultaneously to the head of their remaining list.
    Each BS that received proposals pools them with its tentative holders,
    classifies every applicant (an applicant with no BS left after this one
    is 1st or 2nd priority depending on whether this BS was its first
    choice, otherwise 3rd), and keeps its quota by the merged rate/psi order.
    Rejected users drop the BS; those with nothing left become unmatched.
    """
    if ranking not in ("fixed", "pool"):
        raise ValueError(f"unknown ranking mode {ranking!r}")
    factory = pda_fixed_selector if ranking == "fixed" else pda_pool_selector
    return _deferred_acceptance(profile, config.quotas, factory(profile, channel, config), trace)


def run_da(profile: PreferenceProfile, channel: ChannelRealization, config: ScenarioConfig,
           trace: bool = False) -> RunResult:
    """User-proposing deferred acceptance with BSs ranking applicants by rate."""
    return _deferred_acceptance(profile, config.quotas, rate_selector(channel.avg_rates), trace)


def run_rssi(channel: ChannelRealization, config: ScenarioConfig, trace: bool = False) -> RunResult:
    """Every user picks its strongest BS; over-subscribed BSs keep the strongest."""
    rssi = channel.received_power(config)
    n_bs, n_users = rssi.shape
    choice = np.argmax(rssi, axis=0) if n_users else np.zeros(0, dtype=int)
    assignment: list[Optional[int]] = [None] * n_users
    rejections = []
    for l in range(n_bs):
        selectors = [m for m in range(n_users) if choice[m] == l]
        selectors.sort(key=lambda m: (-rssi[l, m], m))
        for m in selectors[:config.quotas[l]]:
            assignment[m] = l
        rejections.extend([m, l] for m in selectors[config.quotas[l]:])
    log = None
    if trace:
        log = [{
            "round": 1,
            "proposals": sorted([int(m), int(choice[m])] for m in range(n_users)),
            "rejections": sorted(rejections),
            "held": [sum(b == l for b in assignment) for l in range(n_bs)],
            "unmatched": sorted(m for m, _ in rejections),
        }] if n_users else []
    return RunResult(Matching.from_assignment(assignment, n_bs), 1 if n_users else 0, n_users, log)


ALGORITHMS = ("pda", "da", "rssi")


def run_algorithm(name: str, profile: PreferenceProfile, channel: ChannelRealization,
                  config: ScenarioConfig, trace: bool = False) -> RunResult:
    if name == "pda":
        return run_pda(profile, channel, config, trace)
    if name == "da":
        return run_da(profile, channel, config, trace)
    if name == "rssi":
        return run_rssi(channel, config, trace)
    raise ValueError(f"unknown algorithm {name!r}")
