"""User preference lists and the BS-side priority/promotion machinery."""
from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .config import ScenarioConfig


class Priority(enum.IntEnum):
    FIRST = 0
    SECOND = 1
    THIRD = 2


@dataclass(frozen=True)
class PreferenceProfile:
    """Acceptable BSs of every user, best first, and the rates behind them."""

    user_lists: tuple[tuple[int, ...], ...]
    rate_matrix: np.ndarray  # (L, M)

    @property
    def num_users(self) -> int:
        return len(self.user_lists)

    @property
    def num_bs(self) -> int:
        return self.rate_matrix.shape[0]

    def acceptable(self, m: int, l: int) -> bool:
        return l in self.user_lists[m]

    def rank(self, m: int, l: int | None) -> int:
        """Position of BS l in user m's list; unmatched sits just past the end.

        Unacceptable BSs rank below being unmatched.
        """
        chi = self.user_lists[m]
        if l is None:
            return len(chi)
        try:
            return chi.index(l)
        except ValueError:
            return len(chi) + 1 + l

    def prefers(self, m: int, a: int | None, b: int | None) -> bool:
        """True if user m strictly prefers a to b (None is unmatched)."""
        return self.rank(m, a) < self.rank(m, b)


def build_user_preferences(rate_matrix: np.ndarray, rate_threshold: float) -> PreferenceProfile:
    rates = np.asarray(rate_matrix, dtype=float)
    lists = []
    for m in range(rates.shape[1]):
        col = rates[:, m]
        # stable sort on -rate keeps lower BS index first among ties
        order = np.argsort(-col, kind="stable")
        lists.append(tuple(int(l) for l in order if col[l] > rate_threshold))
    return PreferenceProfile(user_lists=tuple(lists), rate_matrix=rates)


def chance_flag(remaining_list, l: int) -> int:
    """1 if the user still has somewhere to go after being rejected by l."""
    remaining_list = tuple(remaining_list)
    if not remaining_list or remaining_list[0] != l:
        raise ValueError(f"BS {l} is not the head of {remaining_list}")
    return int(len(remaining_list) > 1)


def classify_priority(l: int, first_choice: int, flag: int) -> Priority:
    if flag:
        return Priority.THIRD
    return Priority.FIRST if first_choice == l else Priority.SECOND


def static_priority(profile: PreferenceProfile, m: int, l: int) -> Priority:
    """Class of user m at BS l as a function of its full list alone.

    The chance flag is 1 exactly when m has an acceptable BS ranked below l,
    which is also what an applicant carries when it proposes to l in order.
    """
    chi = profile.user_lists[m]
    if l not in chi:
        raise ValueError(f"BS {l} is not acceptable to user {m}")
    return classify_priority(l, chi[0], chance_flag(chi[chi.index(l):], l))


def promotion(alpha: float, sinr, zeta1: float, zeta2: float, w: float = 1.0) -> float:
    """Subcarrier-averaged promotion alpha*zeta1 / log2(zeta2 + alpha*sinr)."""
    sinr = np.atleast_1d(np.asarray(sinr, dtype=float))
    return float(np.mean(w * alpha * zeta1 / np.log2(zeta2 + alpha * sinr)))


def bs_scores(sinr, priority: Priority, config: ScenarioConfig) -> tuple[float, float]:
    """(rate, psi) of one applicant at one BS from its per-subcarrier SINRs."""
    sinr = np.atleast_1d(np.asarray(sinr, dtype=float))
    w = config.subcarrier_bandwidth
    rate = float(np.mean(w * np.log2(1.0 + sinr)))
    alpha = config.priority_coeffs[priority]
    return rate, promotion(alpha, sinr, config.zeta1, config.zeta2, w) + rate


def promotion_table(channel: ChannelRealization, config: ScenarioConfig) -> np.ndarray:
    """Promotion of every (class, BS, user), shape (3, L, M)."""
    w = config.subcarrier_bandwidth
    out = np.empty((3,) + channel.avg_rates.shape)
    for c, alpha in enumerate(config.priority_coeffs):
        out[c] = (w * alpha * config.zeta1 / np.log2(config.zeta2 + alpha * channel.sinr)).mean(axis=1)
    return out


def psi_table(channel: ChannelRealization, config: ScenarioConfig) -> np.ndarray:
    """Promoted score rate + promotion for every (class, BS, user)."""
    return promotion_table(channel, config) + channel.avg_rates[None, :, :]


@dataclass(frozen=True)
class Applicant:
    user_id: int
    priority: Priority
    rate: float
    psi: float
    remaining_list: tuple[int, ...] = ()


def merge_order(pool) -> list[Applicant]:
    """Rank a BS's applicant pool.

    Applicants of the same class compare by rate; the three per-class queues
    are then merged by always taking the head with the largest psi. Ties go
    to the lower user index.
    """
    queues = {c: [] for c in Priority}
    for a in pool:
        queues[a.priority].append(a)
    for q in queues.values():
        q.sort(key=lambda a: (-a.rate, a.user_id))
    heads = [(-q[0].psi, q[0].user_id, c, 0) for c, q in queues.items() if q]
    heapq.heapify(heads)
    order = []
    while heads:
        _, _, c, i = heapq.heappop(heads)
        order.append(queues[c][i])
        if i + 1 < len(queues[c]):
            nxt = queues[c][i + 1]
            heapq.heappush(heads, (-nxt.psi, nxt.user_id, c, i + 1))
    return order


def rank_and_select(pool, quota: int) -> tuple[list[Applicant], list[Applicant]]:
    order = merge_order(pool)
    return order[:quota], order[quota:]


def bs_rankings(profile: PreferenceProfile, psi: np.ndarray) -> list[dict[int, int]]:
    """Fixed ranking of every BS over all users that find it acceptable.

    Position 0 is the most preferred user. The ranking is the merged order of
    the whole acceptable population with history-free classes, so
    restricting it to any pool gives a consistent (transitive) preference.
    """
    rates = profile.rate_matrix
    pools: list[list[Applicant]] = [[] for _ in range(profile.num_bs)]
    for m, chi in enumerate(profile.user_lists):
        for l in chi:
            c = static_priority(profile, m, l)
            pools[l].append(Applicant(m, c, float(rates[l, m]), float(psi[c, l, m])))
    return [{a.user_id: pos for pos, a in enumerate(merge_order(pool))} for pool in pools]
