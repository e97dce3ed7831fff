"""Round-Robin and Mod-Cut&Choose as mechanisms over reported bids.

Both return the allocation together with an execution trace.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import Allocation, BidProfile, UsageError, bid_sum, induced_ranking


@dataclass(frozen=True)
class PickStep:
    round: int  # 1-based
    agent: int
    good: int
    available: frozenset[int]  # goods still unallocated right before this pick


@dataclass(frozen=True)
class PickTrace:
    steps: tuple[PickStep, ...]

    def __len__(self):
        return len(self.steps)

    def history(self) -> tuple[frozenset[int], ...]:
        """Available sets M_1 ⊇ ... ⊇ M_{m+1}; the last one is empty."""
        if not self.steps:
            return (frozenset(),)
        return tuple(s.available for s in self.steps) + (frozenset(),)


def _check_order(order: Sequence[int] | None, n: int) -> tuple[int, ...]:
    if order is None:
        return tuple(range(n))
    order = tuple(order)
    if sorted(order) != list(range(n)):
        raise UsageError(f"order {order} is not a permutation of {n} agents")
    return order


def rr_picks(rankings: Sequence[Sequence[int]], order: Sequence[int], m: int) -> list[tuple[int, int]]:
    """Core Round-Robin loop on rankings: the (agent, good) picks in sequence.

    Each agent walks her ranking with a cursor, skipping taken goods, so a full
    run costs O(n*m).
    """
    taken = [False] * m
    cursor = [0] * len(rankings)
    picks = []
    left = m
    while left:
        for i in order:
            if not left:
                break
            r = rankings[i]
            c = cursor[i]
            while taken[r[c]]:
                c += 1
            g = r[c]
            cursor[i] = c + 1
            taken[g] = True
            picks.append((i, g))
            left -= 1
    return picks


def rr_bundles(rankings: Sequence[Sequence[int]], order: Sequence[int], m: int) -> tuple[frozenset[int], ...]:
    bundles: list[set[int]] = [set() for _ in rankings]
    for i, g in rr_picks(rankings, order, m):
        bundles[i].add(g)
    return tuple(frozenset(b) for b in bundles)


def round_robin(profile: BidProfile, order: Sequence[int] | None = None,
                m: int | None = None) -> tuple[Allocation, PickTrace]:
    """Run Round-Robin on a bid profile.

    There are ceil(m/n) rounds and in each round agents act in ``order``
    (identity by default); the active agent takes the available good with
    the highest bid, ties going to the lowest good index. Agents late in the
    order simply make no pick once every good is gone.

    >>> alloc, _ = round_robin(BidProfile(((6, 5, 4), (4, 6, 5))))
    >>> alloc.as_lists()
    [[0, 2], [1]]
    """
    n = profile.n
    if n < 1:
        raise UsageError("need at least one agent")
    if m is not None and profile.m != m:
        raise UsageError(f"bid rows have {profile.m} entries, instance has {m} goods")
    order = _check_order(order, n)
    m = profile.m
    rankings = [induced_ranking(row) for row in profile.rows]
    return _run_traced(rankings, order, m, n)


def round_robin_rankings(rankings: Sequence[Sequence[int]], order: Sequence[int] | None = None
                         ) -> tuple[Allocation, PickTrace]:
    """Round-Robin driven directly by preference rankings."""
    n = len(rankings)
    order = _check_order(order, n)
    m = len(rankings[0]) if rankings else 0
    for r in rankings:
        if sorted(r) != list(range(m)):
            raise UsageError(f"{tuple(r)} is not a ranking of {m} goods")
    return _run_traced(rankings, order, m, n)


def _run_traced(rankings, order, m, n):
    available = set(range(m))
    bundles: list[set[int]] = [set() for _ in range(n)]
    steps = []
    for t, (i, g) in enumerate(rr_picks(rankings, order, m)):
        steps.append(PickStep(t // n + 1, i, g, frozenset(available)))
        available.discard(g)
        bundles[i].add(g)
    return Allocation(tuple(frozenset(b) for b in bundles)), PickTrace(tuple(steps))


# --- Mod-Cut&Choose ------------------------------------------------------

@dataclass(frozen=True)
class CutResult:
    E1: frozenset[int]
    E2: frozenset[int]
    chosen: int  # 1 or 2: the bundle agent 2 takes

    @property
    def cut(self) -> tuple[frozenset[int], frozenset[int]]:
        return self.E1, self.E2


@dataclass(frozen=True)
class CutStep:
    good: int
    bundle: int  # 1 or 2
    sums_before: tuple[Fraction, Fraction]


def cut_phase_trace(b1: Sequence) -> tuple[frozenset[int], frozenset[int], tuple[CutStep, ...]]:
    """Cut phase with the per-insertion record of both bundle sums."""
    b1 = [Fraction(x) for x in b1]
    E = (set(), set())
    sums = [Fraction(0), Fraction(0)]
    steps = []
    for g in induced_ranking(b1):
        j = 0 if sums[0] <= sums[1] else 1
        steps.append(CutStep(g, j + 1, (sums[0], sums[1])))
        E[j].add(g)
        sums[j] += b1[g]
    return frozenset(E[0]), frozenset(E[1]), tuple(steps)


def cut_phase(b1: Sequence) -> tuple[frozenset[int], frozenset[int]]:
    """Split the goods into (E1, E2) as agent 1's bid dictates.

    Goods go in decreasing order of ``b1`` (ties by index) to whichever
    bundle currently has the smaller ``b1`` sum; equal sums favour E1.
    """
    E1, E2, _ = cut_phase_trace(b1)
    return E1, E2


def choose(E1: frozenset[int], E2: frozenset[int], b2: Sequence) -> int:
    """Agent 2's pick on a fixed cut: the b2-larger bundle, ties to E1."""
    return 1 if bid_sum(b2, E1) >= bid_sum(b2, E2) else 2


def mod_cut_and_choose(b1: Sequence, b2: Sequence) -> tuple[Allocation, CutResult]:
    """Agent 1 cuts with ``b1``, agent 2 takes the ``b2``-best bundle."""
    if len(b1) != len(b2):
        raise UsageError(f"bid vectors have lengths {len(b1)} and {len(b2)}")
    E1, E2 = cut_phase(b1)
    ell = choose(E1, E2, b2)
    taken = E1 if ell == 1 else E2
    rest = E2 if ell == 1 else E1
    return Allocation((rest, taken)), CutResult(E1, E2, ell)


def mod_cut_and_choose_profile(profile: BidProfile) -> tuple[Allocation, CutResult]:
    if profile.n != 2:
        raise UsageError(f"Mod-Cut&Choose needs exactly 2 agents, got {profile.n}")
    return mod_cut_and_choose(profile[0], profile[1])
