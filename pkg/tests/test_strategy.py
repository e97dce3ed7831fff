import itertools
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from fairpne.core import BidProfile, BudgetExceeded, Instance, UsageError, value_of
from fairpne.fairness import is_alpha_mms, is_ef1, is_efx, mms
from fairpne.mechanisms import cut_phase, mod_cut_and_choose, round_robin_rankings
from fairpne.strategy import (all_rankings, mcc_best_response, mcc_canonical_bid, mcc_construct_pne,
                              mcc_mu1_bid, mcc_ordered_bid, mcc_verify_pne, rankings_of,
                              reachable_cuts, rr_best_response, rr_enumerate_pne, rr_is_pne,
                              verify_profile)
from oracles import mcc_naive, rr_pne_naive, val

EXAMPLE = Instance(((6, 5, 4), (4, 6, 5)))
TRUTHFUL = [(0, 1, 2), (1, 2, 0)]
V_STAR = (F(6, 5), 1, 1, F(1, 10))


def rows(n, m, hi=6):
    return st.lists(st.lists(st.integers(0, hi), min_size=m, max_size=m), min_size=n, max_size=n)


class TestRoundRobinBestResponse:
    def test_example_manipulation(self):
        r, value = rr_best_response(EXAMPLE, 0, TRUTHFUL)
        assert value == 11
        assert r == (1, 0, 2)
        alloc, _ = round_robin_rankings([r, TRUTHFUL[1]])
        assert alloc[0] == {0, 1}

    def test_single_agent(self):
        inst = Instance(((3, 1, 2),))
        r, value = rr_best_response(inst, 0, [(0, 1, 2)])
        assert value == 6

    def test_two_goods(self):
        inst = Instance(((2, 3), (1, 5)))
        r, value = rr_best_response(inst, 0, [(0, 1), (1, 0)])
        outcomes = [value_of(inst, 0, round_robin_rankings([q, (1, 0)])[0][0]) for q in all_rankings(2)]
        assert value == max(outcomes) == 3

    def test_budget(self):
        inst = Instance(((1,) * 9, (1,) * 9))
        with pytest.raises(BudgetExceeded):
            rr_best_response(inst, 0, [tuple(range(9))] * 2)
        with pytest.raises(BudgetExceeded):
            rr_best_response(EXAMPLE, 0, TRUTHFUL, max_rankings=5)

    def test_bad_input(self):
        with pytest.raises(UsageError):
            rr_best_response(EXAMPLE, 2, TRUTHFUL)
        with pytest.raises(UsageError):
            rr_best_response(EXAMPLE, 0, TRUTHFUL[:1])


class TestRoundRobinPne:
    def test_example_not_pne(self):
        cert = rr_is_pne(EXAMPLE, TRUTHFUL)
        assert not cert.is_pne
        assert cert.witness.agent == 0
        assert cert.witness.strategy == (1, 0, 2)
        assert cert.witness.gain == 1

    @pytest.mark.parametrize("values", [((4, 2), (1, 3)), ((5,), (2,)), ((3, 1, 2),), ((0,) * 3, (0,) * 3)])
    def test_trivial_pne(self, values):
        inst = Instance(values)
        cert = verify_profile(inst, "round-robin", inst.truthful_profile())
        assert cert.is_pne
        assert cert.deviations_checked == inst.n * math.factorial(inst.m)

    def test_all_zero_any_profile(self):
        inst = Instance(((0,) * 3, (0,) * 3))
        assert all(rr_is_pne(inst, [a, b]).is_pne for a in all_rankings(3) for b in all_rankings(3))

    def test_example_enumeration_self_consistent(self):
        found = {c.profile for c in rr_enumerate_pne(EXAMPLE)}
        assert found
        for a in all_rankings(3):
            for b in all_rankings(3):
                assert ((a, b) in found) == rr_is_pne(EXAMPLE, [a, b]).is_pne
        probe = ((1, 0, 2), (1, 2, 0))
        assert (probe in found) == rr_is_pne(EXAMPLE, probe).is_pne

    def test_enumeration_budget(self):
        inst = Instance(((1,) * 5,) * 3)
        with pytest.raises(BudgetExceeded):
            rr_enumerate_pne(inst)

    @settings(max_examples=15)
    @given(rows(2, 3))
    def test_enumeration_matches_brute_force(self, vals):
        inst = Instance(tuple(map(tuple, vals)))
        found = {c.profile for c in rr_enumerate_pne(inst)}
        expect = {(a, b) for a in all_rankings(3) for b in all_rankings(3)
                  if rr_pne_naive(vals, [a, b])}
        assert found == expect

    @settings(max_examples=25)
    @given(st.sampled_from([(2, 2), (2, 3), (2, 4), (3, 2), (3, 3)]).flatmap(
        lambda nm: rows(*nm)), st.randoms(use_true_random=False))
    def test_pne_exist_and_are_ef1(self, vals, rnd):
        inst = Instance(tuple(map(tuple, vals)))
        order = list(range(inst.n))
        rnd.shuffle(order)
        pnes = rr_enumerate_pne(inst, order)
        assert pnes
        for cert in pnes:
            assert is_ef1(inst, cert.allocation).holds
            first = order[0]
            own = value_of(inst, first, cert.allocation[first])
            assert all(own >= value_of(inst, first, b) for b in cert.allocation)

    @settings(max_examples=30)
    @given(rows(2, 4), st.lists(st.permutations(range(4)), min_size=2, max_size=2))
    def test_witness_rechecks(self, vals, profile):
        inst = Instance(tuple(map(tuple, vals)))
        cert = rr_is_pne(inst, profile)
        if not cert.is_pne:
            w = cert.witness
            trial = list(profile)
            trial[w.agent] = w.strategy
            before = value_of(inst, w.agent, cert.allocation[w.agent])
            after = value_of(inst, w.agent, round_robin_rankings(trial)[0][w.agent])
            assert after - before == w.gain > 0


class TestCanonicalBid:
    def test_singleton(self):
        bid = mcc_canonical_bid({0}, {1, 2}, 3)
        assert bid == (1, F(1, 2), F(1, 2))
        assert cut_phase(bid) == ({0}, {1, 2})

    def test_whole_side(self):
        bid = mcc_canonical_bid({0, 1, 2}, set(), 3)
        assert bid == (0, 0, 0)
        assert cut_phase(bid) == ({0, 1, 2}, frozenset())

    def test_two_and_two(self):
        # eps = 1/4; the lone remaining good of the first side gets eps/(k-1)
        bid = mcc_canonical_bid({0, 1}, {2, 3}, 4)
        assert bid == (1, F(1, 4), F(5, 8), F(5, 8))
        assert cut_phase(bid) == ({0, 1}, {2, 3})

    def test_not_partition(self):
        with pytest.raises(UsageError):
            mcc_canonical_bid({0}, {0, 1}, 2)
        with pytest.raises(UsageError):
            mcc_canonical_bid({0}, {1}, 3)

    @pytest.mark.parametrize("m", range(0, 9))
    def test_all_partitions(self, m):
        for labels in itertools.product((0, 1), repeat=m):
            X1 = frozenset(g for g in range(m) if labels[g] == 0)
            X2 = frozenset(range(m)) - X1
            assert set(cut_phase(mcc_canonical_bid(X1, X2, m))) == {X1, X2}

    @pytest.mark.parametrize("m", range(0, 5))
    def test_reachable_cuts_match_bid_grid(self, m):
        grid = [F(k) for k in range(8)] if m <= 3 else [F(k) for k in range(7)]
        seen = {cut_phase(b) for b in itertools.product(grid, repeat=m)}
        listed = {(E1, E2) for E1, E2, _ in reachable_cuts(m)}
        assert seen == listed
        for E1, E2, bid in reachable_cuts(m):
            assert cut_phase(bid) == (E1, E2)

    def test_unreachable(self):
        assert mcc_ordered_bid(set(), {0, 1}, 2) is None
        assert mcc_ordered_bid({1, 2}, {0}, 3) is None


class TestModCutAndChoosePne:
    def test_mu1_bid(self):
        inst = Instance((V_STAR, V_STAR))
        bid, mu = mcc_mu1_bid(inst)
        assert mu == F(13, 10)
        assert set(cut_phase(bid)) == {frozenset({0, 3}), frozenset({1, 2})}

    @pytest.mark.parametrize("row, mu", [((5,), 0), ((1, 1), 1)])
    def test_mu1_small(self, row, mu):
        bid, got = mcc_mu1_bid(Instance((row, row)))
        assert got == mu

    def test_construct_v_star(self):
        inst = Instance((V_STAR, V_STAR))
        b1, b2, cert = mcc_construct_pne(inst)
        assert cert.is_pne
        assert cert.allocation.as_lists() == [[0, 3], [1, 2]]
        assert value_of(inst, 0, cert.allocation[0]) >= F(13, 10)

    def test_zero_bid_not_pne(self):
        inst = Instance((V_STAR, V_STAR))
        cert = mcc_verify_pne(inst, (0,) * 4, V_STAR)
        assert not cert.is_pne
        assert cert.allocation[0] == frozenset()
        assert cert.witness.agent == 0 and cert.witness.gain >= F(13, 10)

    def test_all_zero_values(self):
        inst = Instance(((0, 0, 0), (0, 0, 0)))
        for b1 in itertools.product((0, 1, 2), repeat=3):
            assert mcc_verify_pne(inst, b1, (1, 0, 2)).is_pne

    def test_single_good(self):
        inst = Instance(((3,), (2,)))
        b1, b2, cert = mcc_construct_pne(inst)
        assert cert.is_pne and cert.allocation.as_lists() == [[], [0]]

    def test_errors(self):
        with pytest.raises(UsageError):
            mcc_verify_pne(Instance(((1,),)), (1,), (1,))
        with pytest.raises(UsageError):
            mcc_verify_pne(Instance(((1, 2), (2, 1))), (1,), (1, 2))
        with pytest.raises(BudgetExceeded):
            mcc_construct_pne(Instance(((1,) * 5, (1,) * 5)), max_goods=4)

    @settings(max_examples=40)
    @given(st.integers(1, 5).flatmap(lambda m: rows(2, m, 5)))
    def test_constructed_pne_is_fair(self, vals):
        inst = Instance(tuple(map(tuple, vals)))
        b1, b2, cert = mcc_construct_pne(inst)
        assert cert.is_pne
        assert is_alpha_mms(inst, cert.allocation, 1).holds
        assert is_efx(inst, cert.allocation).holds

    @settings(max_examples=40)
    @given(st.integers(1, 3).flatmap(lambda m: st.tuples(
        rows(2, m, 3), st.lists(st.integers(0, 3), min_size=m, max_size=m),
        st.lists(st.integers(0, 3), min_size=m, max_size=m))))
    def test_verify_against_bid_grid(self, case):
        vals, b1, b2 = case
        inst = Instance(tuple(map(tuple, vals)))
        m = inst.m
        cert = mcc_verify_pne(inst, b1, b2)
        base = mcc_naive(b1, b2)
        grid = list(itertools.product(range(5), repeat=m))
        improves = any(val(vals[0], mcc_naive(d, b2)[0]) > val(vals[0], base[0]) for d in grid) or \
            any(val(vals[1], mcc_naive(b1, d)[1]) > val(vals[1], base[1]) for d in grid)
        assert cert.is_pne == (not improves)
        if not cert.is_pne:
            w = cert.witness
            trial = [b1, b2]
            trial[w.agent] = w.strategy
            got = mcc_naive(*trial)[w.agent]
            assert val(vals[w.agent], got) - val(vals[w.agent], base[w.agent]) == w.gain

    @settings(max_examples=30)
    @given(st.integers(1, 4).flatmap(lambda m: st.tuples(
        rows(2, m, 4), st.lists(st.integers(0, 4), min_size=m, max_size=m))))
    def test_best_response(self, case):
        vals, b = case
        inst = Instance(tuple(map(tuple, vals)))
        for agent in (0, 1):
            bid, value = mcc_best_response(inst, agent, b, b)
            trial = [b, b]
            trial[agent] = bid
            alloc, _ = mod_cut_and_choose(*trial)
            assert value_of(inst, agent, alloc[agent]) == value
            cert = mcc_verify_pne(inst, *trial)
            assert cert.witness is None or cert.witness.agent != agent

    def test_verified_pne_fair_exhaustive_small(self):
        # every PNE over a bid grid at m = 3 is MMS and EFX
        inst = Instance(((3, 1, 2), (1, 2, 2)))
        shares = (mms(inst, 0).value, mms(inst, 1).value)
        grid = list(itertools.product(range(4), repeat=3))
        count = 0
        for b1 in grid:
            for b2 in grid:
                cert = mcc_verify_pne(inst, b1, b2)
                if cert.is_pne:
                    count += 1
                    assert is_alpha_mms(inst, cert.allocation, 1, shares).holds
                    assert is_efx(inst, cert.allocation).holds
        assert count > 0


def test_rankings_of():
    assert rankings_of(BidProfile(((5, 6, 4), (4, 6, 5)))) == ((1, 0, 2), (1, 2, 0))
    with pytest.raises(UsageError):
        verify_profile(EXAMPLE, "nope", EXAMPLE.truthful_profile())
