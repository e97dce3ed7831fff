from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from fairpne.core import BidProfile, UsageError, induced_ranking
from fairpne.mechanisms import (cut_phase, cut_phase_trace, mod_cut_and_choose,
                                mod_cut_and_choose_profile, round_robin, round_robin_rankings)
from oracles import cut_naive, mcc_naive, rr_naive

small = st.integers(0, 6)


@st.composite
def profiles(draw, max_n=3, max_m=7):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(0, max_m))
    return BidProfile(tuple(tuple(draw(small) for _ in range(m)) for _ in range(n)))


class TestRoundRobin:
    def test_truthful_example(self):
        alloc, trace = round_robin(BidProfile(((6, 5, 4), (4, 6, 5))))
        assert alloc.as_lists() == [[0, 2], [1]]
        assert [s.good for s in trace.steps] == [0, 1, 2]
        assert [s.agent for s in trace.steps] == [0, 1, 0]
        assert [s.round for s in trace.steps] == [1, 1, 2]

    def test_manipulated_example(self):
        alloc, _ = round_robin(BidProfile(((5, 6, 4), (4, 6, 5))))
        assert alloc.as_lists() == [[0, 1], [2]]

    def test_single_agent_takes_all(self):
        alloc, _ = round_robin(BidProfile(((3, 1, 2, 0),)))
        assert alloc.as_lists() == [[0, 1, 2, 3]]

    def test_all_zero_bids(self):
        alloc, _ = round_robin(BidProfile(((0,) * 4, (0,) * 4)))
        assert alloc.as_lists() == [[0, 2], [1, 3]]

    def test_empty_goods(self):
        alloc, trace = round_robin(BidProfile(((), ())))
        assert alloc.as_lists() == [[], []]
        assert trace.history() == (frozenset(),)

    def test_order(self):
        alloc, _ = round_robin(BidProfile(((6, 5, 4), (4, 6, 5))), order=(1, 0))
        assert alloc.as_lists() == [[0], [1, 2]]
        alloc, _ = round_robin(BidProfile(((6, 5, 4), (6, 5, 4))), order=(1, 0))
        assert alloc.as_lists() == [[1], [0, 2]]

    def test_bad_order(self):
        with pytest.raises(UsageError):
            round_robin(BidProfile(((1, 2), (2, 1))), order=(0, 0))

    def test_dimension_mismatch(self):
        with pytest.raises(UsageError):
            round_robin(BidProfile(((1, 2), (2, 1))), m=3)

    def test_bad_ranking(self):
        with pytest.raises(UsageError):
            round_robin_rankings([(0, 0, 1)])

    @given(profiles())
    def test_matches_naive_oracle(self, profile):
        alloc, trace = round_robin(profile)
        bundles, picks = rr_naive(profile.rows)
        assert list(alloc) == bundles
        assert [s.good for s in trace.steps] == picks

    @given(profiles(), st.randoms(use_true_random=False))
    def test_trace_and_sizes(self, profile, rnd):
        order = list(range(profile.n))
        rnd.shuffle(order)
        alloc, trace = round_robin(profile, order)
        m, n = profile.m, profile.n
        assert alloc.covers(m)
        assert all(len(b) in (m // n, -(-m // n)) for b in alloc)
        assert len(trace) == m
        hist = trace.history()
        assert len(hist) == m + 1
        for t, (a, b) in enumerate(zip(hist, hist[1:])):
            assert b < a and len(a - b) == 1
            assert len(a) == m - t

    @given(profiles(), st.integers(1, 5), st.integers(0, 4))
    def test_depends_only_on_rankings(self, profile, scale, shift):
        scaled = BidProfile(tuple(tuple(F(x) * scale + shift for x in r) for r in profile.rows))
        assert round_robin(profile) == round_robin(scaled)
        ranks = [induced_ranking(r) for r in profile.rows]
        assert round_robin(profile) == round_robin_rankings(ranks)


class TestCutPhase:
    @pytest.mark.parametrize("b1, E1, E2", [
        ((0, 0, 0), {0, 1, 2}, set()),
        ((1, F(1, 2), F(1, 2)), {0}, {1, 2}),
        ((1, F(1, 2), F(3, 4), F(3, 4)), {0, 1}, {2, 3}),
        ((), set(), set()),
        ((1,), {0}, set()),
    ])
    def test_examples(self, b1, E1, E2):
        assert cut_phase(b1) == (frozenset(E1), frozenset(E2))

    @given(st.lists(st.fractions(0, 5, max_denominator=4), max_size=9))
    def test_matches_oracle_and_balances(self, b1):
        E1, E2, steps = cut_phase_trace(b1)
        assert (E1, E2) == cut_naive(b1)
        assert E1 | E2 == frozenset(range(len(b1))) and not E1 & E2
        assert [s.good for s in steps] == list(induced_ranking(b1))
        for s in steps:
            mine, other = s.sums_before[s.bundle - 1], s.sums_before[2 - s.bundle]
            assert mine <= other
            if s.bundle == 2:
                assert mine < other


class TestModCutAndChoose:
    def test_efx_example(self):
        v = (F(6, 5), 1, 1, F(1, 10))
        b1 = (1, F(5, 8), F(5, 8), F(1, 4))  # forces ({h1,h4}, {h2,h3})
        alloc, cut = mod_cut_and_choose(b1, v)
        assert (cut.E1, cut.E2) == (frozenset({0, 3}), frozenset({1, 2}))
        # agent 2 values {h2,h3} at 2 and {h1,h4} at 13/10
        assert cut.chosen == 2
        assert alloc.as_lists() == [[0, 3], [1, 2]]

    @pytest.mark.parametrize("b2, chosen", [((0, 0, 0), 1), ((0, 1, 0), 1)])
    def test_zero_cut(self, b2, chosen):
        alloc, cut = mod_cut_and_choose((0, 0, 0), b2)
        assert cut.E2 == frozenset() and cut.chosen == chosen
        assert alloc.as_lists() == [[], [0, 1, 2]]

    def test_single_good(self):
        alloc, cut = mod_cut_and_choose((1,), (1,))
        assert (cut.E1, cut.E2) == (frozenset({0}), frozenset())
        assert alloc.as_lists() == [[], [0]]

    def test_tie_goes_to_first_bundle(self):
        alloc, cut = mod_cut_and_choose((1, 1), (1, 1))
        assert cut.chosen == 1 and alloc.as_lists() == [[1], [0]]

    def test_errors(self):
        with pytest.raises(UsageError):
            mod_cut_and_choose((1, 2), (1,))
        with pytest.raises(UsageError):
            mod_cut_and_choose_profile(BidProfile(((1,), (1,), (1,))))

    @given(st.integers(0, 7).flatmap(lambda m: st.tuples(
        st.lists(small, min_size=m, max_size=m), st.lists(small, min_size=m, max_size=m))))
    def test_matches_oracle(self, bids):
        b1, b2 = bids
        alloc, _ = mod_cut_and_choose(b1, b2)
        assert list(alloc) == mcc_naive(b1, b2)
        assert alloc.covers(len(b1))
