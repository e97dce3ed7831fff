"""Seeded instance generation and batch theorem-verification experiments.

Each experiment maps one instance (or one random trial) to a verdict:
``pass``, ``fail`` or ``skip``. Skips come from budgets and are reported
separately, so a budget limit never reads as a confirmation. Every failure
carries a self-contained dump (instance, profile, order, witness) that can
be replayed through the CLI.
"""
from __future__ import annotations

import csv
import functools
import io
import itertools
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterator

from .constructions import (ConstructionError, construct_truthful_equivalent, history_distance,
                            history_trace, partial_slide, perturb_instance,
                            truthful_equivalent_exists)
from .core import (Allocation, BudgetExceeded, Instance, UsageError, format_rational,
                   instance_to_dict, value_of)
from .fairness import is_alpha_mms, is_efx, is_ef1, mms, mms_values
from .mechanisms import choose, cut_phase
from .strategy import (RR_MAX_PROFILES, RoundRobinGame, mcc_canonical_bid, mcc_construct_pne,
                       mcc_verify_pne, reachable_cuts, rr_best_response, rr_enumerate_pne,
                       rr_is_pne)


@dataclass(frozen=True)
class ExperimentConfig:
    """One batch run. Ranges are inclusive ``(low, high)`` pairs."""

    theorem: str
    seed: int = 0
    count: int = 100
    n: tuple[int, int] = (2, 2)
    m: tuple[int, int] = (3, 4)
    values: tuple[int, int] = (0, 9)
    strict: bool = False
    ties: bool = False
    max_profiles: int = RR_MAX_PROFILES
    attempts: int = 200  # random-profile draws per instance (T4.3-random)
    workers: int = 1

    def validate(self) -> None:
        if self.theorem not in EXPERIMENTS:
            raise UsageError(f"unknown theorem id {self.theorem!r}; choose from {sorted(EXPERIMENTS)}")
        for name in ("n", "m", "values"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 0:
                raise UsageError(f"invalid {name} range ({lo}, {hi})")
        if self.n[0] < 1:
            raise UsageError("need at least one agent")
        if self.count < 0:
            raise UsageError("count must be non-negative")
        if self.strict and self.values[1] - self.values[0] + 1 < self.m[1]:
            raise UsageError("value range too small for strict valuations")
        if self.strict and self.ties:
            raise UsageError("strict and ties are mutually exclusive")
        if self.max_profiles > RR_MAX_PROFILES:
            raise UsageError(f"max_profiles above the module limit {RR_MAX_PROFILES}")


@dataclass(frozen=True)
class Verdict:
    index: int
    status: str  # "pass", "fail" or "skip"
    detail: dict = field(default_factory=dict)
    counterexample: dict | None = None


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    verdicts: list[Verdict]
    extras: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    @property
    def counts(self) -> dict[str, int]:
        out = {"pass": 0, "fail": 0, "skip": 0}
        for v in self.verdicts:
            out[v.status] += 1
        return out

    @property
    def ok(self) -> bool:
        return self.counts["fail"] == 0

    def failures(self) -> list[Verdict]:
        return [v for v in self.verdicts if v.status == "fail"]

    def to_dict(self, timing: bool = False, verbose: bool = False) -> dict:
        cfg = asdict(self.config)
        d = {"theorem": self.config.theorem, "config": cfg, "counts": self.counts,
             "ok": self.ok, "extras": self.extras,
             "counterexamples": [{"index": v.index, **v.counterexample} for v in self.failures()],
             "skipped": [{"index": v.index, **v.detail} for v in self.verdicts if v.status == "skip"]}
        if verbose:
            d["verdicts"] = [{"index": v.index, "status": v.status, **v.detail} for v in self.verdicts]
        if timing:
            d["wall_clock"] = self.wall_clock
        return d

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theorem", "index", "status", "detail"])
        for v in self.verdicts:
            detail = ";".join(f"{k}={v.detail[k]}" for k in sorted(v.detail))
            w.writerow([self.config.theorem, v.index, v.status, detail])
        return buf.getvalue()


# --- instance generation ---------------------------------------------------

def instance_rng(seed: int, index: int) -> random.Random:
    """Independent, reproducible stream for one instance of one run."""
    return random.Random(f"{seed}:{index}")


def random_instance(rng: random.Random, n: int, m: int, values: tuple[int, int],
                    strict: bool = False, ties: bool = False) -> Instance:
    lo, hi = values
    rows = []
    for _ in range(n):
        if strict:
            if hi - lo + 1 < m:
                raise UsageError("value range too small for strict valuations")
            rows.append(tuple(rng.sample(range(lo, hi + 1), m)))
        else:
            rows.append(tuple(rng.randint(lo, hi) for _ in range(m)))
    if ties and m >= 2 and all(len(set(r)) == m for r in rows):
        i = rng.randrange(n)
        g, h = rng.sample(range(m), 2)
        row = list(rows[i])
        row[h] = row[g]
        rows[i] = tuple(row)
    return Instance(tuple(rows))


def gen_instances(config: ExperimentConfig) -> Iterator[Instance]:
    """Seeded stream of integer-valued instances (same config, same stream)."""
    config.validate()
    for idx in range(config.count):
        rng = instance_rng(config.seed, idx)
        n = rng.randint(*config.n)
        m = rng.randint(*config.m)
        yield random_instance(rng, n, m, config.values, config.strict, config.ties)


def _dump(inst: Instance, **extra) -> dict:
    out = {"instance": instance_to_dict(inst)}
    for k, v in extra.items():
        out[k] = _jsonable(v)
    return out


def _jsonable(x):
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, (frozenset, set)):
        return sorted(x)
    if isinstance(x, Allocation):
        return x.as_lists()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _random_order(rng: random.Random, n: int) -> tuple[int, ...]:
    order = list(range(n))
    rng.shuffle(order)
    return tuple(order)


def _random_rankings(rng: random.Random, n: int, m: int) -> list[tuple[int, ...]]:
    return [tuple(rng.sample(range(m), m)) for _ in range(n)]


# --- experiments ---------------------------------------------------------------
# Each takes (config, index) and returns a Verdict; instance-based ones
# regenerate their instance from the per-index stream.

def _instance_for(config: ExperimentConfig, idx: int) -> tuple[Instance, random.Random]:
    rng = instance_rng(config.seed, idx)
    n = rng.randint(*config.n)
    m = rng.randint(*config.m)
    return random_instance(rng, n, m, config.values, config.strict, config.ties), rng


def exp_rr_pne_ef1(config, idx) -> Verdict:
    """Every Round-Robin PNE is EF1 (and at least one exists)."""
    inst, _ = _instance_for(config, idx)
    pnes = rr_enumerate_pne(inst, None, config.max_profiles)
    if not pnes:
        return Verdict(idx, "fail", {"pne": 0}, _dump(inst, reason="no PNE"))
    for cert in pnes:
        rep = is_ef1(inst, cert.allocation)
        if not rep.holds:
            return Verdict(idx, "fail", {"pne": len(pnes)},
                           _dump(inst, profile=cert.profile, allocation=cert.allocation,
                                 witness=rep.to_dict()["witness"], reason="PNE not EF1"))
    return Verdict(idx, "pass", {"pne": len(pnes)})


def exp_first_picker_ef(config, idx) -> Verdict:
    """Under a random agent order, the first picker is envy-free at every PNE."""
    inst, rng = _instance_for(config, idx)
    order = _random_order(rng, inst.n)
    pnes = rr_enumerate_pne(inst, order, config.max_profiles)
    first = order[0]
    for cert in pnes:
        own = value_of(inst, first, cert.allocation[first])
        for j, b in enumerate(cert.allocation):
            if value_of(inst, first, b) > own:
                return Verdict(idx, "fail", {"pne": len(pnes)},
                               _dump(inst, order=order, profile=cert.profile,
                                     allocation=cert.allocation, witness={"agent": first, "other": j},
                                     reason="first picker envies"))
    return Verdict(idx, "pass", {"pne": len(pnes), "order": list(order)})


def exp_ties_pne(config, idx) -> Verdict:
    """PNE exist with tied values, and perturbed-instance PNE stay PNE."""
    inst, _ = _instance_for(config, idx)
    game = RoundRobinGame.build(inst, None, config.max_profiles)
    orig = game.pne_mask()
    if not orig.any():
        return Verdict(idx, "fail", {}, _dump(inst, reason="no PNE with ties"))
    pert = perturb_instance(inst, lift_zero=True)
    pgame = RoundRobinGame.build(pert, None, config.max_profiles)
    pmask = pgame.pne_mask()
    if not pmask.any():
        return Verdict(idx, "fail", {}, _dump(inst, perturbed=instance_to_dict(pert),
                                                  reason="no PNE after perturbation"))
    if (pmask & ~orig).any():
        bad = tuple(int(k) for k in next(zip(*(pmask & ~orig).nonzero())))
        return Verdict(idx, "fail", {}, _dump(inst, perturbed=instance_to_dict(pert),
                                                  profile=pgame.profile(bad),
                                                  reason="perturbed PNE is not a PNE originally"))
    first = tuple(int(k) for k in next(zip(*pmask.nonzero())))
    cert = rr_is_pne(inst, pgame.profile(first))
    if not cert.is_pne:
        return Verdict(idx, "fail", {}, _dump(inst, profile=pgame.profile(first),
                                                  reason="re-verification failed"))
    return Verdict(idx, "pass", {"pne": int(orig.sum()), "perturbed_pne": int(pmask.sum())})


def exp_partial_slide(config, idx) -> Verdict:
    """One partial slide in one ranking moves each history set by at most one good."""
    inst, rng = _instance_for(config, idx)
    if inst.m < 2:
        return Verdict(idx, "pass", {"trivial": True})
    rankings = _random_rankings(rng, inst.n, inst.m)
    agent = rng.randrange(inst.n)
    x = rng.randint(1, inst.m - 1)
    y = rng.randint(x + 1, inst.m)
    slid = list(rankings)
    slid[agent] = partial_slide(rankings[agent], x, y)
    try:
        dist = history_distance(history_trace(inst, rankings), history_trace(inst, slid))
    except AssertionError as exc:
        dist = str(exc)
    if dist != 0 and dist != 1:
        return Verdict(idx, "fail", {}, _dump(inst, profile=rankings, agent=agent, x=x, y=y,
                                                  distance=dist, reason="history moved too far"))
    return Verdict(idx, "pass", {"distance": dist})


def exp_truthful_equivalent(config, idx) -> Verdict:
    """Rebuild a truthful-equivalent valuation for a brute-forced best response."""
    inst, rng = _instance_for(config, idx)
    order = _random_order(rng, inst.n)
    rankings = _random_rankings(rng, inst.n, inst.m)
    me = order[0]
    br, _ = rr_best_response(inst, me, rankings, order)
    rankings[me] = br
    try:
        res = construct_truthful_equivalent(inst, rankings, order)
    except ConstructionError as exc:
        exists = truthful_equivalent_exists(inst, rankings, order)
        reason = ("no valuation satisfies the requirements (checked exhaustively)" if exists is None
                  else "construction failed although a valuation exists")
        return Verdict(idx, "fail", {"error": str(exc)},
                       _dump(inst, order=order, profile=rankings, error=str(exc), reason=reason))
    cases = ",".join(s.case for s in reversed(res.states))
    return Verdict(idx, "pass", {"cases": cases})


def exp_canonical_partition(config, idx) -> Verdict:
    """All partitions of m goods into two labelled sides (m = index) reproduce."""
    m = idx
    for labels in itertools.product((0, 1), repeat=m):
        X1 = frozenset(g for g in range(m) if labels[g] == 0)
        X2 = frozenset(range(m)) - X1
        E1, E2 = cut_phase(mcc_canonical_bid(X1, X2, m))
        if {E1, E2} != {X1, X2}:
            return Verdict(idx, "fail", {}, {"m": m, "partition": [sorted(X1), sorted(X2)],
                                             "cut": [sorted(E1), sorted(E2)]})
    return Verdict(idx, "pass", {"partitions": 2 ** m})


def _mcc_fair(inst: Instance, alloc: Allocation) -> tuple[bool, dict]:
    shares = mms_values(inst)
    mms_rep = is_alpha_mms(inst, alloc, 1, shares)
    efx_rep = is_efx(inst, alloc)
    return mms_rep.holds and efx_rep.holds, {"mms": mms_rep.holds, "efx": efx_rep.holds}


def exp_mcc_constructed(config, idx) -> Verdict:
    """The constructed Mod-Cut&Choose PNE is MMS and EFX."""
    inst, _ = _instance_for(config, idx)
    b1, b2, cert = mcc_construct_pne(inst)
    ok, detail = _mcc_fair(inst, cert.allocation)
    if not (cert.is_pne and ok):
        return Verdict(idx, "fail", detail, _dump(inst, profile=[b1, b2], allocation=cert.allocation,
                                                      reason="constructed PNE not fair"))
    return Verdict(idx, "pass", detail)


def exp_mcc_random_profiles(config, idx) -> Verdict:
    """A random bid profile that verifies as PNE is MMS and EFX."""
    inst, rng = _instance_for(config, idx)
    top = max(config.values[1], 1)
    for attempt in range(config.attempts):
        b1 = [rng.randint(0, top) for _ in range(inst.m)]
        b2 = [rng.randint(0, top) for _ in range(inst.m)]
        cert = mcc_verify_pne(inst, b1, b2)
        if not cert.is_pne:
            continue
        ok, detail = _mcc_fair(inst, cert.allocation)
        detail["attempts"] = attempt + 1
        if not ok:
            return Verdict(idx, "fail", detail, _dump(inst, profile=[b1, b2],
                                                          allocation=cert.allocation,
                                                          reason="random PNE not fair"))
        return Verdict(idx, "pass", detail)
    return Verdict(idx, "skip", {"reason": f"no PNE among {config.attempts} random profiles"})


def _all_allocations(n: int, m: int) -> Iterator[Allocation]:
    for labels in itertools.product(range(n), repeat=m):
        yield Allocation(tuple(frozenset(g for g in range(m) if labels[g] == i) for i in range(n)))


def _grid_instances(m: int, values: tuple[int, int]) -> list[Instance]:
    """Two-agent instances up to relabelling goods: multisets of value pairs."""
    lo, hi = values
    pairs = list(itertools.product(range(lo, hi + 1), repeat=2))
    out = []
    for cols in itertools.combinations_with_replacement(pairs, m):
        out.append(Instance((tuple(c[0] for c in cols), tuple(c[1] for c in cols))))
    return out


def _grid(config: ExperimentConfig) -> tuple[Instance, ...]:
    return _grid_cached(config.m, config.values)


@functools.lru_cache(maxsize=8)
def _grid_cached(ms: tuple[int, int], values: tuple[int, int]) -> tuple[Instance, ...]:
    out = []
    for m in range(ms[0], ms[1] + 1):
        out.extend(_grid_instances(m, values))
    return tuple(out)


def _mask_tables(inst: Instance, agent: int):
    """Per-bitmask bundle value and smallest positive good value for one agent."""
    row = inst.values[agent]
    size = 1 << inst.m
    total = [Fraction(0)] * size
    least = [None] * size
    for mask in range(1, size):
        g = (mask & -mask).bit_length() - 1
        rest = mask & (mask - 1)
        total[mask] = total[rest] + row[g]
        prev = least[rest]
        if row[g] > 0:
            least[mask] = row[g] if prev is None else min(prev, row[g])
        else:
            least[mask] = prev
    return total, least


def _alloc_from_mask(mask: int, m: int) -> Allocation:
    """Agent 1 gets the goods in ``mask``, agent 0 the rest."""
    mine = frozenset(g for g in range(m) if mask >> g & 1)
    return Allocation((frozenset(range(m)) - mine, mine))


def exp_mms_vs_efx(config, idx, inst: Instance | None = None) -> Verdict:
    """Two agents: MMS implies EFX, and EFX implies 2/3-MMS (all allocations).

    Uses per-bitmask tables instead of the general checkers; the two are
    cross-checked in the test suite.
    """
    inst = inst if inst is not None else _grid(config)[idx]
    shares = mms_values(inst)
    tables = [_mask_tables(inst, i) for i in range(2)]
    full = (1 << inst.m) - 1
    worst = None
    for mask in range(full + 1):
        own = (full ^ mask, mask)  # agent 0 gets the complement of mask
        vals = [tables[i][0][own[i]] for i in range(2)]
        efx = True
        for i in range(2):
            other = own[1 - i]
            least = tables[i][1][other]
            if least is not None and vals[i] < tables[i][0][other] - least:
                efx = False
        is_mms = all(vals[i] >= shares[i] for i in range(2))
        if is_mms and not efx:
            return Verdict(idx, "fail", {}, _dump(inst, allocation=_alloc_from_mask(mask, inst.m),
                                                      reason="MMS but not EFX"))
        if efx:
            if any(vals[i] * 3 < shares[i] * 2 for i in range(2)):
                return Verdict(idx, "fail", {}, _dump(inst, allocation=_alloc_from_mask(mask, inst.m),
                                                          reason="EFX but not 2/3-MMS"))
            for i in range(2):
                if shares[i] > 0:
                    r = vals[i] / shares[i]
                    if worst is None or r < worst[0]:
                        worst = (r, mask)
    detail = {}
    if worst is not None:
        detail = {"min_efx_ratio": format_rational(worst[0]),
                  "allocation": _alloc_from_mask(worst[1], inst.m).as_lists()}
    return Verdict(idx, "pass", detail)


def _few_positive_rows(values: tuple[int, int]) -> list[tuple[int, ...]]:
    lo, hi = values
    return [r for r in itertools.product(range(lo, hi + 1), repeat=4) if sum(x > 0 for x in r) <= 3]


def exp_few_positive(config, idx) -> Verdict:
    """m = 4, at most three positive goods: EFX from her view gives at least mu_i."""
    row = _few_positive_rows(config.values)[idx]
    inst = Instance((row, row))
    mu = mms(inst, 0, 2).value
    for alloc in _all_allocations(2, 4):
        mine = value_of(inst, 0, alloc[0])
        efx_view = all(v == 0 or mine >= value_of(inst, 0, alloc[1]) - v
                       for v in (row[g] for g in alloc[1]))
        if efx_view and mine < mu:
            return Verdict(idx, "fail", {}, _dump(inst, allocation=alloc, mms=mu,
                                                      reason="EFX from her view but below mu"))
    return Verdict(idx, "pass", {"mms": format_rational(mu)})


def _mcc_answers(inst: Instance, cuts) -> list[tuple[Fraction, ...]]:
    """Agent 2 bids tried against every cut: truthful, zero, and each cut's E2 indicator."""
    m = inst.m
    answers = [tuple(inst.values[1]), tuple(Fraction(0) for _ in range(m))]
    for _, E2, _ in cuts:
        ind = tuple(Fraction(1) if g in E2 else Fraction(0) for g in range(m))
        if ind not in answers:
            answers.append(ind)
    return answers


def exp_mcc_consistency(config, idx, strict_mms: bool) -> Verdict:
    """Every PNE in the candidate family meets the MMS bound.

    Candidates are screened with agent 1's best value per answer of agent
    2, then each survivor is confirmed by the full deviation check.
    """
    inst, _ = _instance_for(config, idx)
    shares = mms_values(inst)
    cuts = reachable_cuts(inst.m)
    found = 0
    for b2 in _mcc_answers(inst, cuts):
        outcomes = []
        for E1, E2, b1 in cuts:
            taken, rest = (E1, E2) if choose(E1, E2, b2) == 1 else (E2, E1)
            outcomes.append((b1, rest, taken))
        best1 = max(value_of(inst, 0, rest) for _, rest, _ in outcomes)
        for b1, rest, taken in outcomes:
            if value_of(inst, 0, rest) < best1:
                continue
            cert = mcc_verify_pne(inst, b1, b2)
            if not cert.is_pne:
                continue
            found += 1
            alloc = cert.allocation
            if strict_mms:
                ok = is_alpha_mms(inst, alloc, 1, shares).holds
            else:
                ok = all(shares[i] == 0 or value_of(inst, i, alloc[i]) * 3 > shares[i] * 2
                         for i in range(2))
            if not ok:
                return Verdict(idx, "fail", {"pne": found},
                               _dump(inst, profile=[b1, b2], allocation=alloc,
                                     reason="PNE allocation below the MMS bound"))
    if not found:
        return Verdict(idx, "fail", {}, _dump(inst, reason="no PNE in the candidate family"))
    return Verdict(idx, "pass", {"pne": found})


EXPERIMENTS: dict[str, dict] = {
    "T3.1": {"run": exp_rr_pne_ef1, "defaults": {"n": (2, 2), "m": (3, 5)}},
    "T3.3": {"run": exp_first_picker_ef, "defaults": {"n": (2, 3), "m": (2, 4)}},
    "TA.2": {"run": exp_ties_pne, "defaults": {"n": (2, 3), "m": (2, 4), "values": (0, 3),
                                                "ties": True}},
    "L3.6": {"run": exp_partial_slide, "defaults": {"n": (1, 3), "m": (1, 6), "count": 1000, "attempts": 2000}},
    "L3.4": {"run": exp_truthful_equivalent, "defaults": {"n": (2, 3), "m": (2, 5),
                                                          "values": (0, 14), "strict": True}},
    "L4.2": {"run": exp_canonical_partition, "defaults": {"m": (0, 10)}, "count": "m"},
    "T4.3": {"run": exp_mcc_constructed, "defaults": {"m": (1, 8), "count": 300}},
    "T4.3-random": {"run": exp_mcc_random_profiles, "defaults": {"m": (1, 5), "values": (0, 4),
                                                                 "count": 1000, "attempts": 2000}},
    "T2.6": {"run": exp_mms_vs_efx, "defaults": {"m": (1, 5), "values": (0, 2)}, "count": "grid"},
    "T2.7": {"run": exp_mms_vs_efx, "defaults": {"m": (1, 5), "values": (0, 2)}, "count": "grid"},
    "L4.5": {"run": exp_few_positive, "defaults": {"m": (4, 4), "values": (0, 3)}, "count": "rows"},
    "MCC-4.6": {"run": lambda c, i: exp_mcc_consistency(c, i, True),
                "defaults": {"m": (4, 4), "count": 200}},
    "MCC-4.8": {"run": lambda c, i: exp_mcc_consistency(c, i, False),
                "defaults": {"m": (1, 6), "count": 200}},
}


def default_config(theorem: str, **overrides) -> ExperimentConfig:
    """Config with the experiment's own defaults, then ``overrides`` (None means keep)."""
    if theorem not in EXPERIMENTS:
        raise UsageError(f"unknown theorem id {theorem!r}; choose from {sorted(EXPERIMENTS)}")
    base = dict(EXPERIMENTS[theorem]["defaults"])
    base.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(theorem=theorem, **base)


def _units(config: ExperimentConfig) -> int:
    """Number of verdicts; exhaustive experiments fix it from their domain."""
    kind = EXPERIMENTS[config.theorem].get("count")
    if kind == "m":
        return config.m[1] - config.m[0] + 1
    if kind == "grid":
        return len(_grid(config))
    if kind == "rows":
        return len(_few_positive_rows(config.values))
    return config.count


def _run_one(args) -> Verdict:
    config, idx = args
    fn: Callable = EXPERIMENTS[config.theorem]["run"]
    if EXPERIMENTS[config.theorem].get("count") == "m":
        idx_arg = config.m[0] + idx
        v = fn(config, idx_arg)
        return replace(v, index=idx)
    try:
        return fn(config, idx)
    except BudgetExceeded as exc:
        return Verdict(idx, "skip", {"reason": str(exc)})


def _tightness(report: ExperimentReport, config: ExperimentConfig) -> None:
    """Smallest EFX-allocation MMS ratio seen at m = 4 (T2.7 tightness direction)."""
    grid = _grid(config)
    best = None
    for v in report.verdicts:
        if v.status != "pass" or "min_efx_ratio" not in v.detail:
            continue
        inst = grid[v.index]
        if inst.m != 4:
            continue
        r = Fraction(v.detail["min_efx_ratio"])
        if best is None or r < best[0]:
            best = (r, inst, v.detail["allocation"])
    if best is not None:
        report.extras["tightness_m4"] = {"ratio": format_rational(best[0]),
                                         "instance": instance_to_dict(best[1]),
                                         "allocation": best[2]}


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run every unit of the experiment; verdicts are sorted by index."""
    config.validate()
    start = time.perf_counter()
    jobs = [(config, i) for i in range(_units(config))]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            verdicts = list(pool.map(_run_one, jobs, chunksize=8))
    else:
        verdicts = [_run_one(j) for j in jobs]
    verdicts.sort(key=lambda v: v.index)
    report = ExperimentReport(config, verdicts)
    if config.theorem == "T2.7":
        _tightness(report, config)
    report.wall_clock = time.perf_counter() - start
    return report
