import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cellmatch.config import ScenarioConfig
from cellmatch.fig2 import load_example
from cellmatch.preference import (
    Applicant,
    Priority,
    bs_rankings,
    bs_scores,
    build_user_preferences,
    chance_flag,
    classify_priority,
    merge_order,
    promotion,
    psi_table,
    rank_and_select,
    static_priority,
)

from conftest import random_instance

CFG = ScenarioConfig(num_subcarriers=1)


def psi_by_hand(alpha, gamma, zeta1=0.1, zeta2=3.0):
    return alpha * zeta1 / math.log2(zeta2 + alpha * gamma) + math.log2(1 + gamma)


class TestUserLists:
    def test_sort_and_filter(self):
        prof = build_user_preferences(np.array([[1.0], [2.0], [0.3]]), 0.5)
        assert prof.user_lists == ((1, 0),)

    def test_nothing_acceptable(self):
        prof = build_user_preferences(np.array([[0.1], [0.5]]), 0.5)
        assert prof.user_lists == ((),)

    def test_ties_go_to_lower_index(self):
        prof = build_user_preferences(np.array([[1.0], [2.0], [2.0]]), 0.0)
        assert prof.user_lists == ((1, 2, 0),)

    def test_worked_example_lists(self):
        config, channel = load_example()
        prof = build_user_preferences(channel.avg_rates, config.rate_threshold)
        one_indexed = [tuple(l + 1 for l in chi) for chi in prof.user_lists]
        assert one_indexed == [(1,), (1, 3, 2), (1, 2, 3), (1, 2), (1, 2), (1, 2)]

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10_000))
    def test_list_invariants(self, seed):
        cfg, channel, prof = random_instance(seed)
        for m, chi in enumerate(prof.user_lists):
            assert len(set(chi)) == len(chi)
            rates = [channel.avg_rates[l, m] for l in chi]
            assert rates == sorted(rates, reverse=True)
            assert all(r > cfg.rate_threshold for r in rates)


class TestClasses:
    def test_chance_flag(self):
        assert chance_flag((2,), 2) == 0
        assert chance_flag((2, 0), 2) == 1
        assert chance_flag((2, 0, 1), 2) == 1
        with pytest.raises(ValueError):
            chance_flag((0, 2), 2)

    def test_classify(self):
        assert classify_priority(1, 1, 0) is Priority.FIRST
        assert classify_priority(1, 0, 0) is Priority.SECOND
        assert classify_priority(1, 1, 1) is Priority.THIRD
        assert classify_priority(1, 0, 1) is Priority.THIRD

    def test_classes_exclusive_and_exhaustive(self):
        for l, first, flag in itertools.product(range(3), range(3), (0, 1)):
            predicates = [flag == 0 and first == l, flag == 0 and first != l, flag == 1]
            assert sum(predicates) == 1
            assert predicates.index(True) == classify_priority(l, first, flag)

    def test_static_priority_follows_list_position(self):
        prof = build_user_preferences(np.array([[3.0, 1.0], [2.0, 0.0], [1.0, 0.0]]), 0.5)
        # user 0 lists (0, 1, 2), user 1 lists (0,)
        assert static_priority(prof, 0, 0) is Priority.THIRD
        assert static_priority(prof, 0, 1) is Priority.THIRD
        assert static_priority(prof, 0, 2) is Priority.SECOND
        assert static_priority(prof, 1, 0) is Priority.FIRST
        with pytest.raises(ValueError):
            static_priority(prof, 1, 2)


class TestPromotion:
    def test_zero_zeta1(self):
        assert promotion(100.0, [0.0, 5.0], 0.0, 3.0) == 0.0

    def test_unit_alpha(self):
        assert promotion(1.0, 1.0, 0.1, 3.0) == pytest.approx(0.05, abs=1e-15)

    def test_high_priority_low_sinr(self):
        assert promotion(100.0, 0.01, 0.1, 3.0) == pytest.approx(5.0, abs=1e-12)

    def test_bs_scores(self):
        cfg = ScenarioConfig(num_subcarriers=1, priority_coeffs=(1.0, 1.0, 1.0))
        rate, psi = bs_scores([1.0], Priority.FIRST, cfg)
        assert rate == 1.0
        assert psi == pytest.approx(1.05, abs=1e-12)
        flat = ScenarioConfig(num_subcarriers=1, zeta1=0.0)
        assert bs_scores([0.3, 2.0], Priority.FIRST, flat)[1] == bs_scores([0.3, 2.0], Priority.FIRST, flat)[0]

    def test_higher_priority_scores_higher(self):
        gammas = [0.2, 1.5, 9.0]
        assert bs_scores(gammas, Priority.FIRST, CFG)[1] > bs_scores(gammas, Priority.THIRD, CFG)[1]

    def test_table_matches_scalar(self):
        cfg, channel, _ = random_instance(3)
        psi = psi_table(channel, cfg)
        for c in Priority:
            for l in range(channel.num_bs):
                for m in range(channel.num_users):
                    rate, expected = bs_scores(channel.sinr[l, :, m], c, cfg)
                    assert rate == pytest.approx(channel.avg_rates[l, m], rel=1e-12)
                    assert psi[c, l, m] == pytest.approx(expected, rel=1e-12)

    def test_monotone_on_grid(self):
        grid = np.logspace(-3, 3, 50)
        for alpha in (100.0, 30.0, 1.0):
            values = [promotion(alpha, g, 0.1, 3.0) for g in grid]
            assert all(b < a for a, b in zip(values, values[1:]))


def app(user, priority, rate, psi):
    return Applicant(user, priority, rate, psi)


class TestRankAndSelect:
    def test_quota_not_binding(self):
        pool = [app(0, Priority.THIRD, 1.0, 1.0), app(1, Priority.SECOND, 0.5, 2.0)]
        accepted, rejected = rank_and_select(pool, 3)
        assert {a.user_id for a in accepted} == {0, 1}
        assert rejected == []

    def test_promoted_second_beats_better_rate_third(self):
        second = app(0, Priority.SECOND, *bs_scores([0.01], Priority.SECOND, CFG))
        third = app(1, Priority.THIRD, *bs_scores([0.5], Priority.THIRD, CFG))
        # independent evaluation of the promoted scores
        assert second.psi == pytest.approx(psi_by_hand(30, 0.01), rel=1e-12)
        assert third.psi == pytest.approx(psi_by_hand(1, 0.5), rel=1e-12)
        assert second.psi == pytest.approx(1.756, abs=1e-3)
        assert third.psi == pytest.approx(0.640, abs=1e-3)
        accepted, rejected = rank_and_select([third, second], 1)
        assert [a.user_id for a in accepted] == [0]
        assert [a.user_id for a in rejected] == [1]

    def test_same_class_compares_rate(self):
        # psi deliberately disagrees with rate; within a class rate decides
        pool = [app(0, Priority.THIRD, 1.0, 9.0), app(1, Priority.THIRD, 2.0, 2.1)]
        accepted, _ = rank_and_select(pool, 1)
        assert accepted[0].user_id == 1

    def test_ties_to_lower_user(self):
        pool = [app(5, Priority.THIRD, 1.0, 1.0), app(2, Priority.FIRST, 1.0, 1.0)]
        assert [a.user_id for a in merge_order(pool)] == [2, 5]

    pools = st.lists(
        st.tuples(st.sampled_from(list(Priority)), st.floats(0, 10), st.floats(0, 10)),
        min_size=0, max_size=12,
    )

    @settings(max_examples=200, deadline=None)
    @given(pools, st.integers(1, 6), st.randoms())
    def test_properties(self, raw, quota, rnd):
        pool = [app(i, c, r, r + p) for i, (c, r, p) in enumerate(raw)]
        accepted, rejected = rank_and_select(pool, quota)
        assert len(accepted) == min(len(pool), quota)
        ids_a = {a.user_id for a in accepted}
        ids_r = {a.user_id for a in rejected}
        assert not ids_a & ids_r
        assert ids_a | ids_r == {a.user_id for a in pool}
        for c in Priority:
            rates = [a.rate for a in accepted if a.priority == c]
            assert rates == sorted(rates, reverse=True)
        shuffled = list(pool)
        rnd.shuffle(shuffled)
        again, _ = rank_and_select(shuffled, quota)
        assert [a.user_id for a in again] == [a.user_id for a in accepted]


class TestFixedRankings:
    def test_restriction_of_full_merge(self):
        cfg, channel, prof = random_instance(17)
        psi = psi_table(channel, cfg)
        positions = bs_rankings(prof, psi)
        for l in range(prof.num_bs):
            listed = [m for m, chi in enumerate(prof.user_lists) if l in chi]
            assert sorted(positions[l]) == listed
            pool = [Applicant(m, static_priority(prof, m, l), float(channel.avg_rates[l, m]),
                              float(psi[static_priority(prof, m, l), l, m])) for m in listed]
            assert [a.user_id for a in merge_order(pool)] == sorted(listed, key=positions[l].get)

    def test_cycles_exist_in_per_pool_merge(self):
        # a > b by rate (same class), b > c and c > a by psi
        a = app(0, Priority.SECOND, 1.0, 2.0)
        b = app(1, Priority.SECOND, 0.5, 5.0)
        c = app(2, Priority.THIRD, 3.0, 3.0)
        top = lambda *p: rank_and_select(list(p), 1)[0][0].user_id
        assert top(a, b) == 0
        assert top(b, c) == 1
        assert top(a, c) == 2
