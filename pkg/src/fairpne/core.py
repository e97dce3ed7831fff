"""Exact-arithmetic domain model: instances, bids, rankings, allocations.

All magnitudes are :class:`fractions.Fraction`; nothing is ever rounded.
Goods are indexed ``0..m-1`` and "lexicographic" tie-breaking means the
lower index wins.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction
Bundle = frozenset
Ranking = tuple  # permutation of good indices, most preferred first


class UsageError(ValueError):
    """A caller violated an operation's precondition."""


class ParseError(ValueError):
    """A document could not be turned into a domain object."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class BudgetExceeded(RuntimeError):
    """An exhaustive enumeration would exceed its configured budget."""


def to_rational(x) -> Fraction:
    """Exact conversion of ints, Fractions, and decimal or ``p/q`` strings.

    Floats are rejected: they carry binary rounding the caller never meant.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not values")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        raise TypeError("float values are inexact; pass a string like '1.2'")
    raise TypeError(f"cannot interpret {x!r} as a rational")


def _rational_row(row: Iterable, where: str) -> tuple[Fraction, ...]:
    out = []
    for j, x in enumerate(row):
        try:
            q = to_rational(x)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"{where}[{j}]", f"not a rational ({exc})") from None
        if q < 0:
            raise ParseError(f"{where}[{j}]", f"negative value {q}")
        out.append(q)
    return tuple(out)


@dataclass(frozen=True)
class Instance:
    """``n`` agents with additive, non-negative valuations over ``m`` goods."""

    values: tuple[tuple[Fraction, ...], ...]
    good_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        rows = tuple(_rational_row(r, f"valuations[{i}]") for i, r in enumerate(self.values))
        if not rows:
            raise UsageError("an instance needs at least one agent")
        m = len(rows[0])
        for i, r in enumerate(rows):
            if len(r) != m:
                raise ParseError(f"valuations[{i}]", f"expected {m} entries, got {len(r)}")
        names = tuple(self.good_names) or tuple(f"g{j + 1}" for j in range(m))
        if len(names) != m:
            raise ParseError("goods", f"expected {m} names, got {len(names)}")
        object.__setattr__(self, "values", rows)
        object.__setattr__(self, "good_names", names)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return len(self.good_names)

    @property
    def goods(self) -> frozenset[int]:
        return frozenset(range(self.m))

    def row(self, agent: int) -> tuple[Fraction, ...]:
        _check_agent(self, agent)
        return self.values[agent]

    def with_row(self, agent: int, row: Sequence) -> "Instance":
        """Copy of the instance with one agent's valuation replaced."""
        _check_agent(self, agent)
        rows = list(self.values)
        rows[agent] = tuple(row)
        return Instance(tuple(rows), self.good_names)

    def truthful_profile(self) -> "BidProfile":
        return BidProfile(self.values)


def _check_agent(inst: Instance, agent: int) -> None:
    if not 0 <= agent < inst.n:
        raise UsageError(f"agent index {agent} out of range for n={inst.n}")


@dataclass(frozen=True)
class BidProfile:
    """Reported bid vectors, one row per agent."""

    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(_rational_row(r, f"bids[{i}]") for i, r in enumerate(self.rows))
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise ParseError("bids", "rows have different lengths")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def m(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def __getitem__(self, i: int) -> tuple[Fraction, ...]:
        return self.rows[i]

    def replace(self, agent: int, bid: Sequence) -> "BidProfile":
        rows = list(self.rows)
        rows[agent] = tuple(bid)
        return BidProfile(tuple(rows))


@dataclass(frozen=True)
class Allocation:
    """Ordered partition of the goods into one (possibly empty) bundle per agent."""

    bundles: tuple[frozenset[int], ...]

    def __post_init__(self):
        bundles = tuple(frozenset(b) for b in self.bundles)
        seen: set[int] = set()
        for b in bundles:
            if seen & b:
                raise UsageError(f"bundles overlap on goods {sorted(seen & b)}")
            seen |= b
        object.__setattr__(self, "bundles", bundles)

    @property
    def n(self) -> int:
        return len(self.bundles)

    def __getitem__(self, i: int) -> frozenset[int]:
        return self.bundles[i]

    def __iter__(self):
        return iter(self.bundles)

    def covers(self, m: int) -> bool:
        return frozenset().union(*self.bundles) == frozenset(range(m))

    def as_lists(self) -> list[list[int]]:
        return [sorted(b) for b in self.bundles]


def check_complete(inst: Instance, alloc: Allocation) -> None:
    """Raise :class:`UsageError` unless ``alloc`` is a complete allocation for ``inst``."""
    if alloc.n != inst.n:
        raise UsageError(f"allocation has {alloc.n} bundles for {inst.n} agents")
    if not alloc.covers(inst.m):
        raise UsageError("allocation is not a partition of all goods")


def value_of(inst: Instance, agent: int, bundle: Iterable[int]) -> Fraction:
    """Additive value of ``bundle`` for ``agent``; the empty bundle is worth 0."""
    row = inst.row(agent)
    total = Fraction(0)
    for g in bundle:
        if not 0 <= g < inst.m:
            raise UsageError(f"good index {g} out of range for m={inst.m}")
        total += row[g]
    return total


def bid_sum(bid: Sequence[Fraction], bundle: Iterable[int]) -> Fraction:
    return sum((bid[g] for g in bundle), Fraction(0))


def induced_ranking(bid: Sequence) -> Ranking:
    """Goods by decreasing bid; equal bids go to the lower good index first."""
    return tuple(sorted(range(len(bid)), key=lambda g: (-bid[g], g)))


def ranking_bid(ranking: Sequence[int]) -> tuple[Fraction, ...]:
    """A strict bid vector whose induced ranking is ``ranking``."""
    m = len(ranking)
    bid = [Fraction(0)] * m
    for pos, g in enumerate(ranking):
        bid[g] = Fraction(m - pos)
    return tuple(bid)


def is_strict(row: Sequence) -> bool:
    return len(set(row)) == len(row)


# --- serialization -------------------------------------------------------

def format_rational(q: Fraction):
    """JSON-friendly exact form: ints stay ints, everything else is ``"p/q"``."""
    q = Fraction(q)
    return q.numerator if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _load(text: str) -> dict:
    try:
        doc = json.loads(text, parse_float=lambda s: s)
    except json.JSONDecodeError as exc:
        raise ParseError("document", f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(doc, dict):
        raise ParseError("document", "top level must be an object")
    return doc


def _matrix(doc: dict, key: str) -> list:
    if key not in doc:
        raise ParseError(key, "missing")
    rows = doc[key]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ParseError(key, "must be a list of rows")
    return rows


def instance_from_dict(doc: dict) -> Instance:
    rows = _matrix(doc, "valuations")
    if "agents" in doc:
        n = doc["agents"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ParseError("agents", f"must be a positive integer, got {n!r}")
        if n != len(rows):
            raise ParseError("valuations", f"expected {n} rows, got {len(rows)}")
    names = doc.get("goods")
    if names is None:
        names = ()
    elif not isinstance(names, list) or not all(isinstance(s, str) for s in names):
        raise ParseError("goods", "must be a list of strings")
    for i, r in enumerate(rows):
        if names and len(r) != len(names):
            raise ParseError(f"valuations[{i}]", f"expected {len(names)} entries, got {len(r)}")
    if not rows:
        raise ParseError("valuations", "needs at least one agent")
    return Instance(tuple(_rational_row(r, f"valuations[{i}]") for i, r in enumerate(rows)),
                    tuple(names))


def parse_instance(text: str) -> Instance:
    """Parse the instance JSON document."""
    return instance_from_dict(_load(text))


def instance_to_dict(inst: Instance) -> dict:
    return {
        "agents": inst.n,
        "goods": list(inst.good_names),
        "valuations": [[format_rational(x) for x in row] for row in inst.values],
    }


def serialize_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), sort_keys=True)


def parse_bids(text: str, inst: Instance | None = None) -> BidProfile:
    """Parse a ``{"bids": [[...], ...]}`` document, optionally checked against ``inst``."""
    profile = BidProfile(tuple(_rational_row(r, f"bids[{i}]")
                               for i, r in enumerate(_matrix(_load(text), "bids"))))
    if inst is not None:
        if profile.n != inst.n:
            raise ParseError("bids", f"expected {inst.n} rows, got {profile.n}")
        if profile.n and profile.m != inst.m:
            raise ParseError("bids", f"expected {inst.m} entries per row, got {profile.m}")
    return profile


def serialize_bids(profile: BidProfile) -> str:
    return json.dumps({"bids": [[format_rational(x) for x in r] for r in profile.rows]})


def parse_allocation(text: str, inst: Instance | None = None) -> Allocation:
    doc = _load(text)
    bundles = _matrix(doc, "bundles")
    for i, b in enumerate(bundles):
        if not all(isinstance(g, int) and not isinstance(g, bool) for g in b):
            raise ParseError(f"bundles[{i}]", "good indices must be integers")
    try:
        alloc = Allocation(tuple(frozenset(b) for b in bundles))
    except UsageError as exc:
        raise ParseError("bundles", str(exc)) from None
    if inst is not None:
        try:
            check_complete(inst, alloc)
        except UsageError as exc:
            raise ParseError("bundles", str(exc)) from None
    return alloc


def allocation_to_dict(alloc: Allocation) -> dict:
    return {"bundles": alloc.as_lists()}
