"""Best responses and pure Nash equilibria for both mechanisms.

Bid space is a continuum, so every search runs over outcome-equivalence
classes instead: preference rankings for Round-Robin (its outcome depends
on a bid only through the induced ranking) and reachable ordered cuts plus
a binary choice for Mod-Cut&Choose.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import (Allocation, BidProfile, BudgetExceeded, Instance, UsageError, bid_sum,
                   format_rational, induced_ranking, value_of)
from .fairness import _integer_weights, mms
from .mechanisms import choose, cut_phase, mod_cut_and_choose, rr_bundles

RR_MAX_RANKINGS = 40320      # m! for m = 8
RR_MAX_PROFILES = 15000      # (m!)^n: covers n=2,m=5 and n=3,m=4
MCC_MAX_GOODS = 16


@dataclass(frozen=True)
class Deviation:
    agent: int
    strategy: tuple  # a ranking (Round-Robin) or a bid vector (Mod-Cut&Choose)
    gain: Fraction


@dataclass(frozen=True)
class EquilibriumCertificate:
    mechanism: str  # "round-robin" or "mcc"
    profile: tuple
    is_pne: bool
    deviations_checked: int
    allocation: Allocation
    witness: Deviation | None = None
    order: tuple[int, ...] | None = None

    def to_dict(self) -> dict:
        def strat(s):
            return [format_rational(x) if isinstance(x, Fraction) else x for x in s]
        w = None
        if self.witness is not None:
            w = {"agent": self.witness.agent, "strategy": strat(self.witness.strategy),
                 "gain": format_rational(self.witness.gain)}
        d = {"mechanism": self.mechanism, "profile": [strat(p) for p in self.profile],
             "is_pne": self.is_pne, "deviations_checked": self.deviations_checked,
             "allocation": self.allocation.as_lists(), "witness": w}
        if self.order is not None:
            d["order"] = list(self.order)
        return d


# --- Round-Robin ---------------------------------------------------------

def all_rankings(m: int) -> list[tuple[int, ...]]:
    """Every ranking of m goods, in lexicographic order."""
    return list(itertools.permutations(range(m)))


def _check_rankings(inst: Instance, rankings: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    if len(rankings) != inst.n:
        raise UsageError(f"expected {inst.n} rankings, got {len(rankings)}")
    out = []
    for r in rankings:
        r = tuple(r)
        if sorted(r) != list(range(inst.m)):
            raise UsageError(f"{r} is not a ranking of {inst.m} goods")
        out.append(r)
    return out


def _rr_order(inst: Instance, order) -> tuple[int, ...]:
    order = tuple(range(inst.n)) if order is None else tuple(order)
    if sorted(order) != list(range(inst.n)):
        raise UsageError(f"order {order} is not a permutation of {inst.n} agents")
    return order


def _ranking_budget(m: int, max_rankings: int) -> None:
    if math.factorial(m) > max_rankings:
        raise BudgetExceeded(f"{m}! = {math.factorial(m)} rankings exceed the budget of {max_rankings}")


def rr_best_response(inst: Instance, agent: int, rankings: Sequence[Sequence[int]],
                     order: Sequence[int] | None = None,
                     max_rankings: int = RR_MAX_RANKINGS) -> tuple[tuple[int, ...], Fraction]:
    """Brute-force best response of ``agent`` against the other rankings.

    ``rankings`` holds one ranking per agent; the entry for ``agent`` is
    ignored. Among optimal rankings the lexicographically smallest wins.
    """
    if not 0 <= agent < inst.n:
        raise UsageError(f"agent index {agent} out of range")
    profile = list(rankings)
    if len(profile) != inst.n:
        raise UsageError(f"expected {inst.n} rankings, got {len(profile)}")
    profile[agent] = tuple(range(inst.m))
    profile = _check_rankings(inst, profile)
    order = _rr_order(inst, order)
    _ranking_budget(inst.m, max_rankings)
    best, best_val = None, None
    for r in all_rankings(inst.m):
        profile[agent] = r
        val = value_of(inst, agent, rr_bundles(profile, order, inst.m)[agent])
        if best_val is None or val > best_val:
            best, best_val = r, val
    return best, best_val


def rr_is_pne(inst: Instance, rankings: Sequence[Sequence[int]], order: Sequence[int] | None = None,
              max_rankings: int = RR_MAX_RANKINGS) -> EquilibriumCertificate:
    """Check every unilateral ranking deviation of every agent.

    The witness is the first agent (by index) with a strictly profitable
    deviation, together with her best response and its gain.
    """
    profile = _check_rankings(inst, rankings)
    order = _rr_order(inst, order)
    _ranking_budget(inst.m, max_rankings)
    bundles = rr_bundles(profile, order, inst.m)
    alloc = Allocation(bundles)
    checked = 0
    for i in range(inst.n):
        current = value_of(inst, i, bundles[i])
        br, best = rr_best_response(inst, i, profile, order, max_rankings)
        checked += math.factorial(inst.m)
        if best > current:
            return EquilibriumCertificate("round-robin", tuple(profile), False, checked, alloc,
                                          Deviation(i, br, best - current), order)
    return EquilibriumCertificate("round-robin", tuple(profile), True, checked, alloc, None, order)


def _mask_values(inst: Instance) -> np.ndarray:
    """values[i, mask]: agent i's integer-scaled value of the bundle ``mask``."""
    m = inst.m
    table = np.zeros((inst.n, 1 << m), dtype=object)
    for i in range(inst.n):
        w, _ = _integer_weights(inst.values[i])
        col = np.zeros(1 << m, dtype=object)
        for g in range(m):
            col[1 << g:1 << (g + 1)] = col[:1 << g] + w[g]
        table[i] = col
    if all(int(x) < 2**62 for x in table.ravel()):
        table = table.astype(np.int64)
    return table


@functools.lru_cache(maxsize=32)
def _outcome_masks(n: int, m: int, order: tuple[int, ...]) -> np.ndarray:
    """masks[idx + (i,)]: bitmask of agent i's bundle; values never enter."""
    rankings = all_rankings(m)
    P = len(rankings)
    flat = []
    for idx in itertools.product(range(P), repeat=n):
        for b in rr_bundles([rankings[k] for k in idx], order, m):
            flat.append(sum(1 << g for g in b))
    masks = np.array(flat, dtype=np.int64).reshape((P,) * n + (n,))
    masks.setflags(write=False)
    return masks


@dataclass
class RoundRobinGame:
    """Full outcome table of Round-Robin over the ranking-profile space.

    ``payoff[i]`` is an n-dimensional array indexed by each agent's ranking
    index (into ``rankings``), holding agent i's integer-scaled true value.
    """
    inst: Instance
    order: tuple[int, ...]
    rankings: list[tuple[int, ...]]
    masks: np.ndarray
    payoff: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, inst: Instance, order=None, max_profiles: int = RR_MAX_PROFILES) -> "RoundRobinGame":
        order = _rr_order(inst, order)
        m, n = inst.m, inst.n
        size = math.factorial(m) ** n
        if size > max_profiles:
            raise BudgetExceeded(f"(m!)^n = {size} ranking profiles exceed the budget of {max_profiles}")
        rankings = all_rankings(m)
        masks = _outcome_masks(n, m, order)
        table = _mask_values(inst)
        payoff = np.stack([table[i][masks[..., i]] for i in range(n)])
        return cls(inst, order, rankings, masks, payoff)

    def pne_mask(self) -> np.ndarray:
        ok = np.ones(self.payoff.shape[1:], dtype=bool)
        for i in range(self.inst.n):
            best = self.payoff[i].max(axis=i, keepdims=True)
            ok &= self.payoff[i] == best
        return ok

    def allocation(self, idx: tuple[int, ...]) -> Allocation:
        row = self.masks[idx]
        return Allocation(tuple(frozenset(g for g in range(self.inst.m) if int(row[i]) >> g & 1)
                                for i in range(self.inst.n)))

    def profile(self, idx: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
        return tuple(self.rankings[k] for k in idx)


def rr_enumerate_pne(inst: Instance, order: Sequence[int] | None = None,
                     max_profiles: int = RR_MAX_PROFILES) -> list[EquilibriumCertificate]:
    """All pure Nash equilibria over the ranking-profile space.

    Certificates are in lexicographic order of the profile indices.
    """
    game = RoundRobinGame.build(inst, order, max_profiles)
    checked = inst.n * len(game.rankings)
    out = []
    for idx in zip(*np.nonzero(game.pne_mask())):
        idx = tuple(int(k) for k in idx)
        out.append(EquilibriumCertificate("round-robin", game.profile(idx), True, checked,
                                          game.allocation(idx), None, game.order))
    return out


# --- Mod-Cut&Choose ------------------------------------------------------

def _as_partition(X1, X2, m: int) -> tuple[frozenset[int], frozenset[int]]:
    X1, X2 = frozenset(X1), frozenset(X2)
    if X1 & X2 or (X1 | X2) != frozenset(range(m)):
        raise UsageError(f"({sorted(X1)}, {sorted(X2)}) is not a partition of {m} goods")
    return X1, X2


def mcc_canonical_bid(X1, X2, m: int) -> tuple[Fraction, ...]:
    """Bid that makes the cut phase produce {X1, X2} (as an unordered pair).

    One side everything: all zeros. One side a single good g: 1 on g and
    1/(m-1) elsewhere. Otherwise with k = |X1| >= 2 and m-k >= 2: 1 on the
    lowest-index good of X1, (1+eps)/(m-k) on each good of X2 and
    eps/(k-1) on the rest of X1, where eps = 1/(2(m-k)).
    """
    X1, X2 = _as_partition(X1, X2, m)
    zero = Fraction(0)
    if not X1 or not X2:
        return (zero,) * m
    if len(X1) == 1 or len(X2) == 1:
        single = X1 if len(X1) == 1 else X2
        (g,) = single
        rest = Fraction(1, m - 1)
        return tuple(Fraction(1) if h == g else rest for h in range(m))
    k = len(X1)
    eps = Fraction(1, 2 * (m - k))
    top = min(X1)
    bid = []
    for h in range(m):
        if h == top:
            bid.append(Fraction(1))
        elif h in X2:
            bid.append((1 + eps) / (m - k))
        else:
            bid.append(eps / (k - 1))
    return tuple(bid)


def mcc_ordered_bid(E1, E2, m: int) -> tuple[Fraction, ...] | None:
    """Bid making the cut phase output exactly (E1, E2), or None if no bid can.

    E1 always receives the first processed good, so (empty, M) is
    unreachable; for m >= 3 so is (M - {g1}, {g1}). Every other ordered
    partition is reachable.
    """
    E1, E2 = _as_partition(E1, E2, m)
    canon = mcc_canonical_bid(E1, E2, m)
    if cut_phase(canon) == (E1, E2):
        return canon
    if not E1:
        return None
    one, zero = Fraction(1), Fraction(0)
    if len(E2) == 1:
        (x,) = E2
        if len(E1) == 1:
            (f,) = E1
            bid = tuple(one if h == f else Fraction(1, 2) for h in range(m))
        else:
            f = min(E1)
            if f > x:
                return None
            bid = tuple(one if h in (f, x) else zero for h in range(m))
    else:
        # both sides have >= 2 goods, or E1 is a singleton: swap the roles in
        # the canonical construction so the 1-bid lands in E1
        if len(E1) == 1:
            (f,) = E1
            bid = tuple(one if h == f else Fraction(1, len(E2)) for h in range(m))
        else:
            bid = mcc_canonical_bid(E1, E2, m)
    if cut_phase(bid) != (E1, E2):
        raise AssertionError(f"ordered bid failed to realize {sorted(E1)} | {sorted(E2)}")
    return bid


def reachable_cuts(m: int) -> tuple[tuple[frozenset[int], frozenset[int], tuple[Fraction, ...]], ...]:
    """Every ordered cut (E1, E2) some bid produces, with a bid producing it.

    Cuts come in order of their label vector read as a binary number with
    good 0 as the most significant digit (1 means E2).
    """
    return _reachable_cuts(m)


@functools.lru_cache(maxsize=None)
def _reachable_cuts(m: int):
    goods = range(m)
    out = []
    for labels in itertools.product((0, 1), repeat=m):
        E1 = frozenset(g for g in goods if labels[g] == 0)
        E2 = frozenset(goods) - E1
        bid = mcc_ordered_bid(E1, E2, m)
        if bid is not None:
            out.append((E1, E2, bid))
    return tuple(out)


def _mcc_budget(m: int, max_goods: int) -> None:
    if m > max_goods:
        raise BudgetExceeded(f"{m} goods exceed the Mod-Cut&Choose enumeration budget of {max_goods}")


def _check_two(inst: Instance) -> None:
    if inst.n != 2:
        raise UsageError(f"Mod-Cut&Choose needs exactly 2 agents, got {inst.n}")


def mcc_mu1_bid(inst: Instance) -> tuple[tuple[Fraction, ...], Fraction]:
    """Canonical bid that forces a partition achieving agent 1's maximin share."""
    _check_two(inst)
    cert = mms(inst, 0, 2)
    X1, X2 = cert.witness_partition
    return mcc_canonical_bid(X1, X2, inst.m), cert.value


def _agent1_outcome(inst: Instance, E1, E2, b2) -> tuple[frozenset[int], Fraction]:
    keep = E2 if choose(E1, E2, b2) == 1 else E1
    return keep, value_of(inst, 0, keep)


def _zero_bid(m):
    return (Fraction(0),) * m


def mcc_verify_pne(inst: Instance, b1: Sequence, b2: Sequence,
                   max_goods: int = MCC_MAX_GOODS) -> EquilibriumCertificate:
    """Exhaustive deviation check for a Mod-Cut&Choose bid profile.

    Agent 1's deviations are all reachable ordered cuts, answered by agent
    2's fixed ``b2``. Agent 2 only influences the choice on the fixed cut,
    so her deviations are the bundles she can select there.
    """
    _check_two(inst)
    m = inst.m
    b1 = tuple(Fraction(x) for x in b1)
    b2 = tuple(Fraction(x) for x in b2)
    if len(b1) != m or len(b2) != m:
        raise UsageError(f"bids must have {m} entries")
    _mcc_budget(m, max_goods)
    alloc, cut = mod_cut_and_choose(b1, b2)
    profile = (b1, b2)
    checked = 0
    current = value_of(inst, 0, alloc[0])
    best, best_bid = current, None
    for E1, E2, bid in reachable_cuts(m):
        checked += 1
        _, val = _agent1_outcome(inst, E1, E2, b2)
        if val > best:
            best, best_bid = val, bid
    if best_bid is not None:
        return EquilibriumCertificate("mcc", profile, False, checked, alloc,
                                      Deviation(0, best_bid, best - current))
    current2 = value_of(inst, 1, alloc[1])
    options = [(1, _zero_bid(m))]
    if cut.E2:
        options.append((2, tuple(Fraction(1) if g in cut.E2 else Fraction(0) for g in range(m))))
    for ell, bid in options:
        checked += 1
        val = value_of(inst, 1, cut.E1 if ell == 1 else cut.E2)
        if val > current2:
            return EquilibriumCertificate("mcc", profile, False, checked, alloc,
                                          Deviation(1, bid, val - current2))
    return EquilibriumCertificate("mcc", profile, True, checked, alloc)


def mcc_construct_pne(inst: Instance, max_goods: int = MCC_MAX_GOODS
                      ) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...], EquilibriumCertificate]:
    """Build a PNE: agent 2 truthful, agent 1 forcing her best reachable cut.

    Agent 1's value on a cut is what remains after agent 2's line-7 choice
    under her truthful bid; ties go to the first cut in
    :func:`reachable_cuts` order.
    """
    _check_two(inst)
    _mcc_budget(inst.m, max_goods)
    b2 = tuple(inst.values[1])
    best_val, best_bid = None, None
    for E1, E2, bid in reachable_cuts(inst.m):
        _, val = _agent1_outcome(inst, E1, E2, b2)
        if best_val is None or val > best_val:
            best_val, best_bid = val, bid
    cert = mcc_verify_pne(inst, best_bid, b2, max_goods)
    if not cert.is_pne:
        raise AssertionError("constructed Mod-Cut&Choose profile failed verification")
    return best_bid, b2, cert


def mcc_best_response(inst: Instance, agent: int, b1: Sequence, b2: Sequence,
                      max_goods: int = MCC_MAX_GOODS) -> tuple[tuple[Fraction, ...], Fraction]:
    """Best response bid for either agent of Mod-Cut&Choose, by enumeration."""
    _check_two(inst)
    _mcc_budget(inst.m, max_goods)
    m = inst.m
    if agent == 0:
        best_val, best_bid = None, None
        for E1, E2, bid in reachable_cuts(m):
            _, val = _agent1_outcome(inst, E1, E2, b2)
            if best_val is None or val > best_val:
                best_val, best_bid = val, bid
        return best_bid, best_val
    if agent != 1:
        raise UsageError(f"agent index {agent} out of range")
    E1, E2 = cut_phase(b1)
    if E2 and value_of(inst, 1, E2) > value_of(inst, 1, E1):
        return tuple(Fraction(1) if g in E2 else Fraction(0) for g in range(m)), value_of(inst, 1, E2)
    return _zero_bid(m), value_of(inst, 1, E1)


# --- convenience -----------------------------------------------------------

def rankings_of(profile: BidProfile) -> tuple[tuple[int, ...], ...]:
    return tuple(induced_ranking(r) for r in profile.rows)


def verify_profile(inst: Instance, mechanism: str, profile: BidProfile, order=None) -> EquilibriumCertificate:
    if mechanism == "round-robin":
        return rr_is_pne(inst, rankings_of(profile), order)
    if mechanism == "mcc":
        return mcc_verify_pne(inst, profile[0], profile[1])
    raise UsageError(f"unknown mechanism {mechanism!r}")
