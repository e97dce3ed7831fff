"""Proof-carrying constructions around Round-Robin.

* :func:`perturb_to_strict` breaks value ties without changing which bid is
  a best response.
* :func:`partial_slide` and :func:`history_trace` support the "small change
  in one ranking, small change in history" property.
* :func:`construct_truthful_equivalent` rebuilds the first picker's
  valuation, round by round from the last, into one under which bidding
  truthfully reproduces the allocation. Every intermediate invariant is a
  hard check: a failure raises :class:`ConstructionError`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import (Allocation, BidProfile, Instance, UsageError, induced_ranking, is_strict,
                   ranking_bid, value_of)
from .mechanisms import PickTrace, round_robin_rankings
from .strategy import rr_best_response


class ConstructionError(RuntimeError):
    """An invariant of the truthful-equivalent construction failed."""

    def __init__(self, round_: int | None, message: str):
        where = "setup" if round_ is None else f"round {round_}"
        super().__init__(f"{where}: {message}")
        self.round = round_


def _as_rankings(inst: Instance, profile) -> list[tuple[int, ...]]:
    if isinstance(profile, BidProfile):
        if profile.n != inst.n or (profile.n and profile.m != inst.m):
            raise UsageError("bid profile does not match the instance dimensions")
        return [induced_ranking(r) for r in profile.rows]
    rankings = [tuple(r) for r in profile]
    if len(rankings) != inst.n:
        raise UsageError(f"expected {inst.n} rankings, got {len(rankings)}")
    return rankings


# --- tie-breaking perturbation --------------------------------------------

@dataclass(frozen=True)
class PerturbationResult:
    v_prime: tuple[Fraction, ...]
    epsilon: Fraction
    modified_goods: frozenset[int]  # goods sharing their value with another good
    lifted_zero: int | None = None  # the lone zero-valued good raised to epsilon/3

    @property
    def slack(self) -> Fraction:
        """Upper bound on v'(T) - v(T) over all bundles T."""
        return self.epsilon * (2 if self.lifted_zero is not None else 1) / 3


def smallest_gap(row: Sequence[Fraction]) -> Fraction:
    """Smallest positive difference between two values, or 1 if none."""
    vals = sorted(set(row))
    gaps = [b - a for a, b in zip(vals, vals[1:])]
    return min(gaps) if gaps else Fraction(1)


def perturb_to_strict(inst: Instance, agent: int, profile, order: Sequence[int] | None = None,
                      lift_zero: bool = False) -> PerturbationResult:
    """Tie-free valuation for ``agent`` close to the original.

    With ``A`` the agent's Round-Robin bundle under ``profile`` and ``eps``
    the smallest positive value gap, each tied good g_j gains
    ``j*eps/(3m^2)`` if it lies in ``A`` and ``j*eps/(6m^5)`` otherwise.
    ``lift_zero`` additionally raises a single zero-valued good to
    ``eps/3`` so every value is positive; that costs the best-response
    guarantee and doubles the slack.
    """
    rankings = _as_rankings(inst, profile)
    alloc, _ = round_robin_rankings(rankings, order)
    v = inst.row(agent)
    m = inst.m
    mine = alloc[agent]
    eps = smallest_gap(v)
    counts: dict[Fraction, int] = {}
    for x in v:
        counts[x] = counts.get(x, 0) + 1
    S = frozenset(g for g in range(m) if counts[v[g]] > 1)
    out = list(v)
    for g in S:
        j = g + 1
        out[g] += j * eps / (3 * m**2) if g in mine else j * eps / (6 * m**5)
    lifted = None
    if lift_zero and counts.get(Fraction(0)) == 1:
        lifted = v.index(Fraction(0))
        out[lifted] = eps / 3
    return PerturbationResult(tuple(out), eps, S, lifted)


def perturb_instance(inst: Instance, profile=None, order=None, lift_zero: bool = True) -> Instance:
    """Apply :func:`perturb_to_strict` to every agent (truthful profile by default)."""
    profile = inst.truthful_profile() if profile is None else profile
    rows = [perturb_to_strict(inst, i, profile, order, lift_zero).v_prime for i in range(inst.n)]
    return Instance(tuple(rows), inst.good_names)


# --- partial slides and history traces --------------------------------------

def partial_slide(ranking: Sequence[int], x: int, y: int) -> tuple[int, ...]:
    """Move the element at position ``x`` to just after position ``y``.

    Positions are 1-based, as in q_1 > q_2 > ... > q_m, and need x < y.

    >>> partial_slide((1, 2, 3, 4), 1, 4)
    (2, 3, 4, 1)
    """
    m = len(ranking)
    if not 1 <= x < y <= m:
        raise UsageError(f"partial slide needs 1 <= x < y <= {m}, got x={x}, y={y}")
    r = list(ranking)
    q = r.pop(x - 1)
    r.insert(y - 1, q)
    return tuple(r)


@dataclass(frozen=True)
class HistoryTrace:
    sets: tuple[frozenset[int], ...]  # M_1, ..., M_{m+1}

    def __len__(self):
        return len(self.sets)

    def __getitem__(self, t: int) -> frozenset[int]:
        return self.sets[t]


def history_trace(inst: Instance, profile, order: Sequence[int] | None = None) -> HistoryTrace:
    """Goods still available after 0, 1, ..., m picks of Round-Robin."""
    _, trace = round_robin_rankings(_as_rankings(inst, profile), order)
    return HistoryTrace(trace.history())


def history_distance(a: HistoryTrace, b: HistoryTrace) -> int:
    """max_t |M_t(a) - M_t(b)|, after checking both differences have equal size."""
    worst = 0
    for x, y in zip(a.sets, b.sets):
        if len(x - y) != len(y - x):
            raise AssertionError("history sets of different sizes")
        worst = max(worst, len(x - y))
    return worst


# --- the truthful-equivalent valuation --------------------------------------

@dataclass(frozen=True)
class ConstructionState:
    round: int
    case: str  # "last", "1", "2", "2-tight" or "2-tie"
    bid: tuple[Fraction, ...]
    values: tuple[Fraction, ...]
    lambdas: dict[int, int] = field(default_factory=dict)  # round -> best available good
    ells: dict[int, int | None] = field(default_factory=dict)  # round -> best good lost to others
    eps_i: dict[int, Fraction] = field(default_factory=dict)
    delta: Fraction | None = None
    epsilon: Fraction | None = None
    alpha: Fraction | None = None


@dataclass(frozen=True)
class TruthfulEquivalent:
    v_star: tuple[Fraction, ...]
    b_star: tuple[Fraction, ...]
    allocation: Allocation
    states: tuple[ConstructionState, ...]
    checks: dict[str, bool]


class _Run:
    """Round-Robin with every agent but the first picker held fixed."""

    def __init__(self, inst: Instance, rankings, order):
        self.inst = inst
        self.rankings = list(rankings)
        self.order = tuple(order)
        self.me = self.order[0]
        self.n = inst.n

    def __call__(self, bid) -> tuple[Allocation, PickTrace]:
        profile = list(self.rankings)
        profile[self.me] = induced_ranking(bid)
        return round_robin_rankings(profile, self.order)

    def round_start(self, trace: PickTrace, i: int) -> frozenset[int]:
        return trace.steps[(i - 1) * self.n].available

    def lost_in_round(self, trace: PickTrace, i: int) -> list[int]:
        lo, hi = (i - 1) * self.n + 1, min(i * self.n, len(trace.steps))
        return [trace.steps[t].good for t in range(lo, hi)]


def _argmax(values, goods):
    """Most valuable good; equal values go to the lower index, as a truthful bid would."""
    return max(goods, key=lambda g: (values[g], -g))


def _move_up(bid, values, target: int, threshold: Fraction) -> list[Fraction]:
    """Lift goods ranked below ``target`` but valued above ``threshold``.

    They land at evenly spaced bids strictly between ``target`` and the
    good ranked right above it, keeping their relative order.
    """
    ranking = induced_ranking(bid)
    p = ranking.index(target)
    movers = [g for g in ranking[p + 1:] if values[g] > threshold]
    out = list(bid)
    if not movers:
        return out
    lo = bid[target]
    hi = bid[ranking[p - 1]] if p > 0 else lo + len(movers) + 1
    c = len(movers)
    for t, g in enumerate(movers):
        out[g] = lo + (hi - lo) * (c - t) / (c + 1)
    return out


def _truthful_below(bid, values, target: int, above_scale) -> list[Fraction]:
    """Truthful bids from ``target`` downwards; ``above_scale`` maps the rest."""
    ranking = induced_ranking(bid)
    p = ranking.index(target)
    out = list(bid)
    for g in ranking[p:]:
        out[g] = values[g]
    for g in ranking[:p]:
        out[g] = above_scale(bid[g])
    return out


def _scale_to(bid, target: int, new_level: Fraction):
    """Order-preserving map sending ``bid[target]`` to ``new_level``.

    Multiplicative when the level is positive; a shift otherwise, since a
    zero factor would collapse every bid above the target.
    """
    base = bid[target]
    if new_level > 0:
        return lambda x: x * new_level / base
    return lambda x: x - base + new_level


def construct_truthful_equivalent(inst: Instance, profile, order: Sequence[int] | None = None,
                                  check_best_response: bool = True) -> TruthfulEquivalent:
    """Valuation ``v*`` for the first picker under which truth-telling changes nothing.

    Requires the first picker's valuation to be strict and her ranking in
    ``profile`` to be a best response. The returned ``v*`` keeps the
    allocation when bid truthfully, keeps her own bundle's total value,
    and agrees with her valuation outside her bundle.
    """
    rankings = _as_rankings(inst, profile)
    order = tuple(range(inst.n)) if order is None else tuple(order)
    run = _Run(inst, rankings, order)
    me = run.me
    v = inst.row(me)
    m = inst.m
    if not is_strict(v):
        raise UsageError("the first picker's valuation must be strict; perturb it first")

    base_alloc, base_trace = round_robin_rankings(rankings, order)
    A1 = base_alloc[me]
    if check_best_response:
        _, best = rr_best_response(inst, me, rankings, order)
        if value_of(inst, me, A1) != best:
            raise UsageError("the first picker's ranking is not a best response")
    if m == 0:
        return TruthfulEquivalent((), (), base_alloc, (), {"same_allocation": True})

    pref = rankings[me]  # h_1 > h_2 > ... > h_m
    picks = [s.good for s in base_trace.steps if s.agent == me]
    k = len(picks)
    pos = [pref.index(h) for h in picks]
    if pos != sorted(pos) or pos[0] != 0:
        raise ConstructionError(None, "first picker's goods are not taken in ranking order")
    total_A1 = value_of(inst, me, A1)

    ref = {"trace": base_trace}  # execution every bid must reproduce
    tied = [False]  # set once the tie fallback gives up property (v)

    def same_run(bid, r, what):
        alloc, trace = run(bid)
        if trace != ref["trace"]:
            raise ConstructionError(r, f"{what} changes the Round-Robin execution")
        return trace

    def check_properties(r, bid, vals):
        if sum(vals[g] for g in A1) != total_A1:
            raise ConstructionError(r, "(i) value of the first picker's bundle changed")
        if any(vals[g] != v[g] for g in range(m) if g not in A1):
            raise ConstructionError(r, "(ii) value outside the bundle changed")
        ranking = induced_ranking(bid)
        cut = ranking.index(picks[r - 1])
        if any(bid[g] != vals[g] for g in ranking[cut:]):
            raise ConstructionError(r, "(iii) bid is not truthful from this round")
        if r >= 2:
            upto = pos[r - 2]
            if ranking[:upto + 1] != pref[:upto + 1]:
                raise ConstructionError(r, "(iv) ranking prefix not preserved")
        if not tied[0] and not is_strict(vals):
            raise ConstructionError(r, "(v) values are not distinct")
        if not tied[0] and not is_strict(bid):
            raise ConstructionError(r, "bid has ties")
        same_run(bid, r, "bid")

    states = []
    bid = list(ranking_bid(pref))
    vals = list(v)

    # last round
    trace = same_run(bid, k, "strict re-encoding of the bid")
    h = picks[k - 1]
    lam = _argmax(vals, run.round_start(trace, k))
    if lam != h:
        raise UsageError(f"round {k}: first picker skips her most valuable available good, "
                         "so her bid is not a best response")
    bbar = _move_up(bid, vals, h, vals[lam])
    same_run(bbar, k, "moving up bids")
    bid = _truthful_below(bbar, vals, h, _scale_to(bbar, h, vals[lam]))
    check_properties(k, bid, vals)
    states.append(ConstructionState(k, "last", tuple(bid), tuple(vals), {k: lam}))

    for r in range(k - 1, 0, -1):
        trace = same_run(bid, r, "incoming bid")
        h = picks[r - 1]
        lambdas = {i: _argmax(vals, run.round_start(trace, i)) for i in range(r, k + 1)}
        ells = {}
        for i in range(r, k + 1):
            lost = run.lost_in_round(trace, i)
            ells[i] = _argmax(vals, lost) if lost else None
        for i in range(r + 1, k + 1):
            if lambdas[i] != picks[i - 1]:
                raise ConstructionError(r, f"(iii) round {i} pick is not the most valuable good")
        lam = lambdas[r]
        bbb = _move_up(bid, vals, h, vals[lam])
        same_run(bbb, r, "moving up bids")

        if h == lam:
            bid = _truthful_below(bbb, vals, h, _scale_to(bbb, h, vals[lam]))
            check_properties(r, bid, vals)
            states.append(ConstructionState(r, "1", tuple(bid), tuple(vals), lambdas, ells))
            continue

        # Case 2: shift value from later picks onto h so it tops round r
        goods = range(m)
        delta = min((abs(vals[a] - vals[b]) for a in goods for b in goods if vals[a] != vals[b]),
                    default=Fraction(1))
        ranking = induced_ranking(bbb)
        p = ranking.index(h)
        scale = _scale_to(bbb, h, vals[lam] + delta / 2)
        bar = list(bbb)
        for g in ranking[p + 1:]:
            bar[g] = vals[g]
        for g in ranking[:p + 1]:
            bar[g] = scale(bbb[g])
        bar_trace = same_run(bar, r, "auxiliary bid")

        hat = list(bar)
        hat[h] = vals[h]
        _, hat_trace = run(hat)
        hat_lams = [_argmax(vals, run.round_start(hat_trace, i)) for i in range(r, k + 1)]
        lhs = vals[h] + sum(vals[lambdas[i]] for i in range(r + 1, k + 1))
        # a best response only rules out a strictly better continuation;
        # ties are possible and epsilon > 0 is checked on its own below
        if lhs < sum(vals[g] for g in hat_lams):
            raise ConstructionError(r, "truthful continuation is better; bid was not a best response")
        for x, y in zip(hat_trace.history(), bar_trace.history()):
            if len(x - y) > 1:
                raise ConstructionError(r, "histories differ by more than one good")

        ceil = {}
        for i in range(r + 1, k + 1):
            rest = run.round_start(bar_trace, i) - {picks[i - 1]}
            ceil[i] = max((vals[g] for g in rest), default=Fraction(0))
        eps_i = {i: vals[lambdas[i]] - ceil[i] for i in ceil}
        total = sum(eps_i.values())
        epsilon = total - vals[lam] + vals[h]
        if epsilon <= 0:
            # Tight case: the truthful continuation is exactly as good, so
            # no strict transfer exists. First accept that continuation if
            # it keeps the allocation, adopting its pick order from round r.
            hat_alloc, _ = run(hat)
            if hat_alloc == base_alloc:
                ref["trace"] = hat_trace
                picks[:] = [s.good for s in hat_trace.steps if s.agent == me]
                bid = hat
                check_properties(r, bid, vals)
                states.append(ConstructionState(r, "2-tight", tuple(bid), tuple(vals), lambdas,
                                                ells, eps_i, delta, epsilon))
                continue
            # Otherwise take the boundary transfer (alpha = 0): h_{n_r} ties
            # lambda_r and each later pick ties its best rival. Only the
            # lexicographic tie-break can then keep the execution.
            if epsilon < 0:
                raise ConstructionError(r, "negative slack; bid was not a best response")
            cand = list(vals)
            for i in ceil:
                cand[picks[i - 1]] = ceil[i]
            cand[h] = vals[lam]
            bar_rank = induced_ranking(bar)
            p = bar_rank.index(h)
            tie_bid = list(bar)
            for g in bar_rank[p:]:
                tie_bid[g] = cand[g]
            if run(tie_bid)[1] != ref["trace"]:
                raise ConstructionError(r, "no slack to transfer (epsilon = 0) and neither the "
                                           "truthful continuation nor a tie keeps the allocation")
            tied[0] = True
            bid, vals = tie_bid, cand
            check_properties(r, bid, vals)
            states.append(ConstructionState(r, "2-tie", tuple(bid), tuple(vals), lambdas, ells,
                                            eps_i, delta, epsilon, Fraction(0)))
            continue
        room = min(epsilon, delta)
        t = room / 3
        new_vals = None
        for _ in range(max(m * m, 1)):
            alpha = (epsilon - t) / total
            if not 0 < alpha < 1:
                raise ConstructionError(r, f"alpha {alpha} outside (0, 1)")
            cand = list(vals)
            for i in ceil:
                cand[picks[i - 1]] = ceil[i] + alpha * eps_i[i]
            cand[h] = vals[lam] + t
            if is_strict(cand):
                new_vals = cand
                break
            t = (t + room / 2) / 2
        if new_vals is None:
            raise ConstructionError(r, "could not avoid value collisions")
        bar_rank = induced_ranking(bar)
        p = bar_rank.index(h)
        bid = list(bar)
        for g in bar_rank[p:]:
            bid[g] = new_vals[g]
        vals = new_vals
        check_properties(r, bid, vals)
        states.append(ConstructionState(r, "2", tuple(bid), tuple(vals), lambdas, ells, eps_i,
                                        delta, epsilon, alpha))

    if bid != vals:
        raise ConstructionError(1, "final bid is not truthful")
    v_star = tuple(vals)
    alloc, _ = run(v_star)
    star_inst = inst.with_row(me, v_star)
    checks = {
        "same_allocation": alloc == base_alloc,
        "bundle_value_kept": value_of(star_inst, me, A1) == total_A1,
        "equal_off_bundle": all(v_star[g] == v[g] for g in range(m) if g not in A1),
        "envy_free_for_first": all(value_of(star_inst, me, A1) >= value_of(star_inst, me, B)
                                   for B in alloc),
    }
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        raise ConstructionError(None, f"final checks failed: {failed}")
    return TruthfulEquivalent(v_star, tuple(bid), alloc, tuple(states), checks)


# --- exhaustive existence check -------------------------------------------

def _chain_feasible(ranking, fixed: dict[int, Fraction], total: Fraction) -> bool:
    """Is there a valuation inducing ``ranking`` with the ``fixed`` entries and free goods summing to ``total``?

    The truthful bid of the valuation must induce ``ranking`` under
    lexicographic tie-breaking, so consecutive goods satisfy v(r_j) >= v(r_j+1),
    strictly unless they appear in index order. Every value is >= 0, modelled
    as a virtual zero-valued anchor below the last good. The free goods'
    feasible sums form an interval whose endpoints are attained exactly when
    no strict link separates a free good from its bound.
    """
    m = len(ranking)
    strict = [ranking[j] > ranking[j + 1] for j in range(m - 1)] + [False]
    level = {j: fixed[ranking[j]] for j in range(m) if ranking[j] in fixed}
    level[m] = Fraction(0)
    anchors = sorted(level)
    for a, b in zip(anchors, anchors[1:]):
        if level[a] < level[b] or (level[a] == level[b] and any(strict[a:b])):
            return False
    free = [j for j in range(m) if ranking[j] not in fixed]
    if not free:
        return total == 0
    lo = hi = Fraction(0)
    lo_open = hi_open = unbounded = False
    for j in free:
        below = next(b for b in anchors if b > j)
        above = next((a for a in reversed(anchors) if a < j), None)
        lo += level[below]
        lo_open |= any(strict[j:below])
        if above is None:
            unbounded = True
        else:
            hi += level[above]
            hi_open |= any(strict[above:j])
            if level[above] == level[below] and any(strict[above:below]):
                return False
    ok_lo = total > lo or (total == lo and not lo_open)
    ok_hi = unbounded or total < hi or (total == hi and not hi_open)
    return ok_lo and ok_hi


def truthful_equivalent_exists(inst: Instance, profile, order: Sequence[int] | None = None,
                               max_goods: int = 7):
    """Decide by enumeration whether any valuation meets the three v* requirements.

    Tries every ranking the truthful bid of a candidate ``v*`` could induce.
    Returns a witnessing ranking or None.
    """
    import itertools
    rankings = _as_rankings(inst, profile)
    order = tuple(range(inst.n)) if order is None else tuple(order)
    if inst.m > max_goods:
        from .core import BudgetExceeded
        raise BudgetExceeded(f"{inst.m} goods exceed the existence-check budget of {max_goods}")
    me = order[0]
    base, _ = round_robin_rankings(rankings, order)
    v = inst.row(me)
    fixed = {g: v[g] for g in range(inst.m) if g not in base[me]}
    total = value_of(inst, me, base[me])
    for cand in itertools.permutations(range(inst.m)):
        trial = list(rankings)
        trial[me] = cand
        if round_robin_rankings(trial, order)[0] != base:
            continue
        if _chain_feasible(cand, fixed, total):
            return cand
    return None
