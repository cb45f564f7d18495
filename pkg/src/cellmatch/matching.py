"""Many-to-one matchings: validity, stability audits and a brute-force optimum."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .preference import Applicant, PreferenceProfile, bs_rankings, merge_order, static_priority

# A BS-side ranking: (bs, user ids) -> those user ids, most preferred first.
Ranking = Callable[[int, Sequence[int]], list]


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Matching:
    user_to_bs: tuple[Optional[int], ...]
    bs_to_users: tuple[tuple[int, ...], ...]

    @classmethod
    def from_assignment(cls, assignment: Sequence[Optional[int]], num_bs: int) -> Matching:
        members: list[list[int]] = [[] for _ in range(num_bs)]
        for m, l in enumerate(assignment):
            if l is not None:
                members[l].append(m)
        return cls(tuple(None if l is None else int(l) for l in assignment),
                   tuple(tuple(sorted(u)) for u in members))

    @classmethod
    def empty(cls, num_users: int, num_bs: int) -> Matching:
        return cls.from_assignment([None] * num_users, num_bs)

    @property
    def num_users(self) -> int:
        return len(self.user_to_bs)

    @property
    def num_bs(self) -> int:
        return len(self.bs_to_users)

    @property
    def unmatched(self) -> tuple[int, ...]:
        return tuple(m for m, l in enumerate(self.user_to_bs) if l is None)

    def to_list(self) -> list:
        return [-1 if l is None else l for l in self.user_to_bs]

    def total_rate(self, rate_matrix: np.ndarray) -> float:
        return float(sum(rate_matrix[l, m] for m, l in enumerate(self.user_to_bs) if l is not None))

    def utilities(self, rate_matrix: np.ndarray) -> np.ndarray:
        """Achieved rate of every user; zero when unmatched."""
        out = np.zeros(self.num_users)
        for m, l in enumerate(self.user_to_bs):
            if l is not None:
                out[m] = rate_matrix[l, m]
        return out


@dataclass(frozen=True)
class Violation:
    condition: int
    detail: str


def validate(matching: Matching, quotas: Sequence[int]) -> Optional[Violation]:
    """None when the matching is valid, otherwise the first broken condition.

    1: each user holds at most one BS (and only real BSs);
    2: no BS exceeds its quota;
    3: user-side and BS-side views agree.
    """
    n_bs = matching.num_bs
    seen: dict[int, int] = {}
    for m, l in enumerate(matching.user_to_bs):
        if l is not None and not 0 <= l < n_bs:
            return Violation(1, f"user {m} assigned to unknown BS {l}")
    for l, users in enumerate(matching.bs_to_users):
        for m in users:
            if m in seen and seen[m] != l:
                return Violation(1, f"user {m} held by BS {seen[m]} and BS {l}")
            seen[m] = l
    if len(quotas) != n_bs:
        return Violation(2, f"{len(quotas)} quotas for {n_bs} BSs")
    for l, users in enumerate(matching.bs_to_users):
        if len(users) > quotas[l]:
            return Violation(2, f"BS {l} holds {len(users)} users, quota {quotas[l]}")
    for m, l in enumerate(matching.user_to_bs):
        if l is not None and m not in matching.bs_to_users[l]:
            return Violation(3, f"user {m} points to BS {l} which does not list it")
    for l, users in enumerate(matching.bs_to_users):
        for m in users:
            if not 0 <= m < matching.num_users or matching.user_to_bs[m] != l:
                return Violation(3, f"BS {l} lists user {m} which points elsewhere")
    return None


@dataclass(frozen=True)
class BlockingPair:
    user: int
    bs: int
    displaced: Optional[int]  # None means the BS had a free slot


def rate_ranking(rate_matrix: np.ndarray) -> Ranking:
    def rank(l, users):
        return sorted(users, key=lambda m: (-rate_matrix[l, m], m))
    return rank


def pda_static_ranking(profile: PreferenceProfile, psi: np.ndarray) -> Ranking:
    """BS ranking used to audit priority-based matchings.

    Each BS orders everyone who finds it acceptable once, with the classes a
    user carries when proposing in list order; pools are compared by that
    fixed order.
    """
    positions = bs_rankings(profile, psi)

    def rank(l, users):
        return sorted(users, key=positions[l].__getitem__)
    return rank


def pda_pool_ranking(profile: PreferenceProfile, psi: np.ndarray) -> Ranking:
    """Re-merge each pool from scratch; not transitive across pools."""
    rates = profile.rate_matrix

    def rank(l, users):
        pool = []
        for m in users:
            c = static_priority(profile, m, l)
            pool.append(Applicant(m, c, float(rates[l, m]), float(psi[c, l, m])))
        return [a.user_id for a in merge_order(pool)]
    return rank


def blocking_pairs(matching: Matching, profile: PreferenceProfile, ranking: Ranking,
                   quotas: Sequence[int]) -> list[BlockingPair]:
    """All (user, BS) pairs that would both rather be matched to each other.

    A BS wants a user if it has a free slot or if the user makes its
    selection when added to the current holders.
    """
    found = []
    for m in range(profile.num_users):
        current = matching.user_to_bs[m]
        for l in profile.user_lists[m]:
            if not profile.prefers(m, l, current):
                # lists are ordered, nothing further down can be preferred either
                break
            holders = matching.bs_to_users[l]
            if len(holders) < quotas[l]:
                found.append(BlockingPair(m, l, None))
                continue
            order = ranking(l, list(holders) + [m])
            kept = set(order[:quotas[l]])
            if m in kept:
                displaced = next(u for u in order if u not in kept)
                found.append(BlockingPair(m, l, displaced))
    return found


def brute_force_opt(rate_matrix: np.ndarray, quotas: Sequence[int], rate_threshold: float,
                    max_users: int = 8, max_bs: int = 4) -> Matching:
    """Sum-rate maximising assignment by exhaustive search.

    Only BSs with rate above the threshold may serve a user; users may stay
    unmatched. Among optimal assignments the lexicographically smallest one
    (unmatched before BS 0) is returned.
    """
    rates = np.asarray(rate_matrix, dtype=float)
    n_bs, n_users = rates.shape
    if n_users > max_users or n_bs > max_bs:
        raise InstanceTooLarge(f"brute force limited to M<={max_users}, L<={max_bs}; got M={n_users}, L={n_bs}")
    options = [[None] + [l for l in range(n_bs) if rates[l, m] > rate_threshold] for m in range(n_users)]
    load = [0] * n_bs
    current: list[Optional[int]] = [None] * n_users
    best = {"value": -1.0, "assignment": [None] * n_users}

    def search(m, value):
        if m == n_users:
            if value > best["value"]:
                best["value"] = value
                best["assignment"] = list(current)
            return
        for l in options[m]:
            if l is None:
                current[m] = None
                search(m + 1, value)
            elif load[l] < quotas[l]:
                load[l] += 1
                current[m] = l
                search(m + 1, value + rates[l, m])
                load[l] -= 1
        current[m] = None

    search(0, 0.0)
    return Matching.from_assignment(best["assignment"], n_bs)
