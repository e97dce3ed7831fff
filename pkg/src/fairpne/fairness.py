"""Fairness certificates (EF, EF1, EFX, PROP, alpha-MMS) and exact maximin shares."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import Allocation, BudgetExceeded, Instance, UsageError, check_complete, value_of

NOTIONS = ("ef", "ef1", "efx", "prop")

# Largest |S| the exhaustive maximin-share search accepts, by number of parts.
MMS_MAX_GOODS_TWO = 20
MMS_MAX_GOODS_GENERAL = 12


@dataclass(frozen=True)
class Witness:
    agent: int
    other: int | None = None  # envied agent, when the notion compares bundles
    good: int | None = None   # offending good for EFX


@dataclass(frozen=True)
class FairnessReport:
    notion: str
    per_agent: tuple[bool, ...]
    witness: Witness | None  # first violation in agent-index order

    @property
    def holds(self) -> bool:
        return all(self.per_agent)

    def __bool__(self):
        return self.holds

    def to_dict(self) -> dict:
        w = None
        if self.witness is not None:
            w = {"agent": self.witness.agent, "other": self.witness.other, "good": self.witness.good}
        return {"notion": self.notion, "holds": self.holds,
                "per_agent": list(self.per_agent), "witness": w}


def _report(notion: str, per_agent: list[bool], witnesses: list[Witness | None]) -> FairnessReport:
    first = next((w for w in witnesses if w is not None), None)
    return FairnessReport(notion, tuple(per_agent), first)


def _value_table(inst: Instance, alloc: Allocation) -> list[list[Fraction]]:
    check_complete(inst, alloc)
    return [[value_of(inst, i, b) for b in alloc] for i in range(inst.n)]


def is_ef(inst: Instance, alloc: Allocation) -> FairnessReport:
    """Envy-freeness: nobody values another bundle above her own."""
    table = _value_table(inst, alloc)
    per, wit = [], []
    for i, row in enumerate(table):
        j = next((j for j in range(inst.n) if row[j] > row[i]), None)
        per.append(j is None)
        wit.append(None if j is None else Witness(i, j))
    return _report("ef", per, wit)


def is_prop(inst: Instance, alloc: Allocation) -> FairnessReport:
    table = _value_table(inst, alloc)
    per, wit = [], []
    for i, row in enumerate(table):
        ok = row[i] * inst.n >= sum(inst.values[i])
        per.append(ok)
        wit.append(None if ok else Witness(i))
    return _report("prop", per, wit)


def is_ef1(inst: Instance, alloc: Allocation) -> FairnessReport:
    """Envy is removable by dropping the envied bundle's most valued good."""
    table = _value_table(inst, alloc)
    per, wit = [], []
    for i, row in enumerate(table):
        v = inst.values[i]
        bad = None
        for j, other in enumerate(alloc):
            if j == i or not other:
                continue
            if row[i] < row[j] - max(v[g] for g in other):
                bad = Witness(i, j)
                break
        per.append(bad is None)
        wit.append(bad)
    return _report("ef1", per, wit)


def is_efx(inst: Instance, alloc: Allocation) -> FairnessReport:
    """Envy is removable by dropping any positively valued good.

    Zero-valued goods are exempt, so the witness good is the lowest-index
    positively valued good of the envied bundle that fails.
    """
    table = _value_table(inst, alloc)
    per, wit = [], []
    for i, row in enumerate(table):
        v = inst.values[i]
        bad = None
        for j, other in enumerate(alloc):
            if j == i:
                continue
            for g in sorted(other):
                if v[g] > 0 and row[i] < row[j] - v[g]:
                    bad = Witness(i, j, g)
                    break
            if bad:
                break
        per.append(bad is None)
        wit.append(bad)
    return _report("efx", per, wit)


CHECKS = {"ef": is_ef, "ef1": is_ef1, "efx": is_efx, "prop": is_prop}


# --- maximin shares ------------------------------------------------------

@dataclass(frozen=True)
class MmsCertificate:
    agent: int
    n_parts: int
    value: Fraction
    witness_partition: tuple[frozenset[int], ...]

    def to_dict(self) -> dict:
        from .core import format_rational
        return {"agent": self.agent, "parts": self.n_parts, "value": format_rational(self.value),
                "witness": [sorted(b) for b in self.witness_partition]}


def _integer_weights(values: Sequence[Fraction]) -> tuple[list[int], int]:
    """Common-denominator integers; comparisons among sums are unchanged."""
    den = 1
    for x in values:
        den = math.lcm(den, Fraction(x).denominator)
    return [int(Fraction(x) * den) for x in values], den


def _best_split(weights: list[int]) -> tuple[int, int]:
    """Best two-way split over subsets that contain item 0.

    Returns (mask over items 1..k-1, best min-side value).
    """
    k = len(weights)
    total = sum(weights)
    dtype = np.int64 if total < 2**62 else object
    sums = np.array([weights[0]], dtype=dtype)
    for w in weights[1:]:
        sums = np.concatenate([sums, sums + w])
    mins = np.minimum(sums, total - sums)
    idx = int(np.argmax(mins))
    return idx, int(mins[idx])


def _best_partition(weights: list[int], parts: int) -> tuple[int, list[int]]:
    """Branch and bound over set partitions into at most ``parts`` blocks.

    Goods are placed heaviest first; a good may open at most one new block,
    which removes block-permutation symmetry. Returns (best min, labels).
    """
    k = len(weights)
    order = sorted(range(k), key=lambda x: (-weights[x], x))
    suffix = [0] * (k + 1)
    for p in range(k - 1, -1, -1):
        suffix[p] = suffix[p + 1] + weights[order[p]]
    sums = [0] * parts
    labels = [0] * k
    best = [-1, None]

    def rec(p: int, used: int):
        low = min(sums) if used == parts else 0
        if low + suffix[p] <= best[0]:
            return
        if p == k:
            best[0] = low
            best[1] = labels.copy()
            return
        w = weights[order[p]]
        for b in range(min(used + 1, parts)):
            sums[b] += w
            labels[order[p]] = b
            rec(p + 1, max(used, b + 1))
            sums[b] -= w

    rec(0, 0)
    return best[0], best[1]


def mms(inst: Instance, agent: int, n_parts: int | None = None,
        subset: Iterable[int] | None = None, max_goods: int | None = None) -> MmsCertificate:
    """Exact ``n_parts``-maximin share of ``agent`` on ``subset`` (default: all goods).

    Two parts use a vectorised sweep over the 2^(|S|-1) splits; more parts
    use a branch-and-bound set-partition search. Raises
    :class:`BudgetExceeded` above ``max_goods``.
    """
    n_parts = inst.n if n_parts is None else n_parts
    if n_parts < 1:
        raise UsageError("n_parts must be at least 1")
    row = inst.row(agent)
    S = sorted(inst.goods if subset is None else set(subset))
    if any(not 0 <= g < inst.m for g in S):
        raise UsageError("subset contains goods outside the instance")
    if max_goods is None:
        max_goods = MMS_MAX_GOODS_TWO if n_parts == 2 else MMS_MAX_GOODS_GENERAL
    empty = frozenset()
    if n_parts == 1 or not S:
        part = (frozenset(S),) + (empty,) * (n_parts - 1)
        return MmsCertificate(agent, n_parts, value_of(inst, agent, S) if n_parts == 1 else Fraction(0), part)
    if n_parts >= len(S):
        # one good per block; leftover blocks are empty
        blocks = tuple(frozenset([g]) for g in S) + (empty,) * (n_parts - len(S))
        val = min(row[g] for g in S) if n_parts == len(S) else Fraction(0)
        return MmsCertificate(agent, n_parts, val, blocks)
    if len(S) > max_goods:
        raise BudgetExceeded(f"maximin share over {len(S)} goods into {n_parts} parts "
                             f"exceeds the budget of {max_goods} goods")
    weights, den = _integer_weights([row[g] for g in S])
    if n_parts == 2:
        mask, best = _best_split(weights)
        first = {S[0]} | {S[t + 1] for t in range(len(S) - 1) if mask >> t & 1}
        part = (frozenset(first), frozenset(S) - frozenset(first))
    else:
        best, labels = _best_partition(weights, n_parts)
        blocks = [set() for _ in range(n_parts)]
        for t, lab in enumerate(labels):
            blocks[lab].add(S[t])
        part = tuple(frozenset(b) for b in blocks)
    return MmsCertificate(agent, n_parts, Fraction(best, den), part)


def mms_values(inst: Instance, max_goods: int | None = None) -> tuple[Fraction, ...]:
    return tuple(mms(inst, i, inst.n, max_goods=max_goods).value for i in range(inst.n))


def is_alpha_mms(inst: Instance, alloc: Allocation, alpha=1,
                 shares: Sequence[Fraction] | None = None) -> FairnessReport:
    """Every agent gets at least ``alpha`` times her maximin share."""
    alpha = Fraction(alpha)
    table = _value_table(inst, alloc)
    shares = mms_values(inst) if shares is None else shares
    per, wit = [], []
    for i in range(inst.n):
        ok = table[i][i] >= alpha * shares[i]
        per.append(ok)
        wit.append(None if ok else Witness(i))
    return _report("mms", per, wit)


def mms_ratio(inst: Instance, alloc: Allocation, agent: int,
              shares: Sequence[Fraction] | None = None) -> Fraction | None:
    """v_i(A_i) / mu_i, or None when the share is 0."""
    shares = mms_values(inst) if shares is None else shares
    if shares[agent] == 0:
        return None
    return value_of(inst, agent, alloc[agent]) / shares[agent]


def fairness_report(inst: Instance, alloc: Allocation, notions: Sequence[str] = NOTIONS,
                    alpha=1) -> dict[str, FairnessReport]:
    out = {}
    for name in notions:
        if name == "mms":
            out[name] = is_alpha_mms(inst, alloc, alpha)
        elif name in CHECKS:
            out[name] = CHECKS[name](inst, alloc)
        else:
            raise UsageError(f"unknown fairness notion {name!r}")
    return out
