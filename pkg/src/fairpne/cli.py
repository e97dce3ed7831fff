"""Command-line front end: ``fairpne <subcommand> ...``.

JSON goes to stdout, diagnostics to stderr. Agents are numbered from 1 on
the command line (``--agent 1``, ``--order 2,1``); goods inside JSON
documents are 0-based indices. Exit status: 0 success, 1 theorem
violation, 2 usage, parse or budget error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import constructions, core, fairness, harness, mechanisms, strategy
from .core import (BidProfile, BudgetExceeded, ParseError, UsageError, allocation_to_dict,
                   format_rational)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _instance(args) -> core.Instance:
    return core.parse_instance(_read(args.instance))


def _agent(args, inst) -> int:
    if not 1 <= args.agent <= inst.n:
        raise UsageError(f"--agent must be between 1 and {inst.n}")
    return args.agent - 1


def _order(args, n: int):
    if not getattr(args, "order", None):
        return None
    try:
        order = tuple(int(x) - 1 for x in args.order.split(","))
    except ValueError:
        raise UsageError(f"--order must be comma-separated agent numbers, got {args.order!r}") from None
    if sorted(order) != list(range(n)):
        raise UsageError(f"--order must be a permutation of 1..{n}")
    return order


def _profile(args, inst) -> BidProfile | None:
    """Bids from --bids, or bids realizing --rankings; None if neither was given."""
    if getattr(args, "bids", None) and getattr(args, "rankings", None):
        raise UsageError("give --bids or --rankings, not both")
    if getattr(args, "bids", None):
        return core.parse_bids(_read(args.bids), inst)
    if getattr(args, "rankings", None):
        doc = json.loads(_read(args.rankings))
        rows = doc.get("rankings") if isinstance(doc, dict) else None
        if not isinstance(rows, list) or len(rows) != inst.n:
            raise ParseError("rankings", f"expected {inst.n} rankings")
        for i, r in enumerate(rows):
            if not isinstance(r, list) or sorted(r) != list(range(inst.m)):
                raise ParseError(f"rankings[{i}]", f"not a ranking of {inst.m} goods")
        return BidProfile(tuple(core.ranking_bid(r) for r in rows))
    return None


def _rat(q):
    return format_rational(q)


def _row(row):
    return [_rat(x) for x in row]


# --- subcommands ---------------------------------------------------------------

def cmd_gen(args):
    cfg = harness.ExperimentConfig("T3.1", seed=args.seed, count=args.count, n=(args.n, args.n),
                                   m=(args.m, args.m), values=_pair(args.values),
                                   strict=args.strict, ties=args.ties)
    docs = [core.instance_to_dict(i) for i in harness.gen_instances(cfg)]
    _emit(docs[0] if args.count == 1 else {"instances": docs})
    return 0


def cmd_allocate(args):
    inst = _instance(args)
    profile = _profile(args, inst) or inst.truthful_profile()
    if args.mechanism == "round-robin":
        alloc, trace = mechanisms.round_robin(profile, _order(args, inst.n), inst.m)
        doc = allocation_to_dict(alloc)
        if args.trace:
            doc["trace"] = [{"round": s.round, "agent": s.agent + 1, "good": s.good,
                             "available": sorted(s.available)} for s in trace.steps]
    else:
        if args.order:
            raise UsageError("--order applies to round-robin only")
        alloc, cut = mechanisms.mod_cut_and_choose_profile(profile)
        doc = allocation_to_dict(alloc)
        if args.trace:
            _, _, steps = mechanisms.cut_phase_trace(profile[0])
            doc["trace"] = {"E1": sorted(cut.E1), "E2": sorted(cut.E2), "chosen": cut.chosen,
                            "cut_steps": [{"good": s.good, "bundle": s.bundle,
                                           "sums_before": _row(s.sums_before)} for s in steps]}
    _emit(doc)
    return 0


def cmd_fairness(args):
    inst = _instance(args)
    alloc = core.parse_allocation(_read(args.allocation), inst)
    notions = [x.strip() for x in args.notions.split(",") if x.strip()]
    try:
        alpha = core.to_rational(args.alpha)
    except (TypeError, ValueError, ZeroDivisionError):
        raise UsageError(f"--alpha must be rational, got {args.alpha!r}") from None
    reports = fairness.fairness_report(inst, alloc, notions, alpha)
    doc = {name: rep.to_dict() for name, rep in reports.items()}
    if "mms" in reports:
        doc["mms"]["alpha"] = _rat(alpha)
        doc["mms"]["shares"] = _row(fairness.mms_values(inst))
    _emit(doc)
    return 0


def cmd_mms(args):
    inst = _instance(args)
    cert = fairness.mms(inst, _agent(args, inst), args.parts, max_goods=args.budget)
    doc = cert.to_dict()
    doc["agent"] = cert.agent + 1
    _emit(doc)
    return 0


def _cert_doc(cert: strategy.EquilibriumCertificate) -> dict:
    doc = cert.to_dict()
    if doc["witness"] is not None:
        doc["witness"]["agent"] += 1
    if "order" in doc:
        doc["order"] = [i + 1 for i in doc["order"]]
    return doc


def _need_profile(args, inst):
    profile = _profile(args, inst)
    if profile is None:
        raise UsageError("this command needs --bids or --rankings")
    return profile


def cmd_best_response(args):
    inst = _instance(args)
    profile = _need_profile(args, inst)
    agent = _agent(args, inst)
    if args.mechanism == "round-robin":
        budget = args.budget or strategy.RR_MAX_RANKINGS
        r, val = strategy.rr_best_response(inst, agent, strategy.rankings_of(profile),
                                           _order(args, inst.n), budget)
        doc = {"agent": agent + 1, "ranking": list(r), "bid": _row(core.ranking_bid(r)),
               "value": _rat(val)}
    else:
        budget = args.budget or strategy.MCC_MAX_GOODS
        bid, val = strategy.mcc_best_response(inst, agent, profile[0], profile[1], budget)
        doc = {"agent": agent + 1, "bid": _row(bid), "value": _rat(val)}
    current = core.value_of(inst, agent, _outcome(args, inst, profile)[agent])
    doc["current_value"] = _rat(current)
    _emit(doc)
    return 0


def _outcome(args, inst, profile):
    if args.mechanism == "round-robin":
        return mechanisms.round_robin(profile, _order(args, inst.n), inst.m)[0]
    return mechanisms.mod_cut_and_choose_profile(profile)[0]


def cmd_verify_pne(args):
    inst = _instance(args)
    profile = _need_profile(args, inst)
    if args.mechanism == "round-robin":
        cert = strategy.rr_is_pne(inst, strategy.rankings_of(profile), _order(args, inst.n),
                                  args.budget or strategy.RR_MAX_RANKINGS)
    else:
        cert = strategy.mcc_verify_pne(inst, profile[0], profile[1],
                                       args.budget or strategy.MCC_MAX_GOODS)
    _emit(_cert_doc(cert))
    return 0


def cmd_find_pne(args):
    inst = _instance(args)
    if args.mechanism == "round-robin":
        certs = strategy.rr_enumerate_pne(inst, _order(args, inst.n),
                                          args.budget or strategy.RR_MAX_PROFILES)
        shown = certs if args.limit is None else certs[:args.limit]
        _emit({"mechanism": "round-robin", "count": len(certs),
               "equilibria": [_cert_doc(c) for c in shown]})
    else:
        b1, b2, cert = strategy.mcc_construct_pne(inst, args.budget or strategy.MCC_MAX_GOODS)
        _emit({"mechanism": "mcc", "count": 1, "equilibria": [_cert_doc(cert)]})
    return 0


def cmd_construct_pne(args):
    inst = _instance(args)
    if args.mechanism == "mcc":
        b1, b2, cert = strategy.mcc_construct_pne(inst, args.budget or strategy.MCC_MAX_GOODS)
        doc = _cert_doc(cert)
        doc["bids"] = [_row(b1), _row(b2)]
        doc["mms"] = fairness.is_alpha_mms(inst, cert.allocation).to_dict()
        doc["efx"] = fairness.is_efx(inst, cert.allocation).to_dict()
    else:
        certs = strategy.rr_enumerate_pne(inst, _order(args, inst.n),
                                          args.budget or strategy.RR_MAX_PROFILES)
        if not certs:
            print("no pure Nash equilibrium found", file=sys.stderr)
            return 1
        doc = _cert_doc(certs[0])
        doc["bids"] = [_row(core.ranking_bid(r)) for r in certs[0].profile]
        doc["ef1"] = fairness.is_ef1(inst, certs[0].allocation).to_dict()
    _emit(doc)
    return 0


def cmd_perturb(args):
    inst = _instance(args)
    profile = _profile(args, inst) or inst.truthful_profile()
    agent = _agent(args, inst)
    res = constructions.perturb_to_strict(inst, agent, profile, _order(args, inst.n),
                                          lift_zero=args.lift_zero)
    _emit({"agent": agent + 1, "v_prime": _row(res.v_prime), "epsilon": _rat(res.epsilon),
           "modified_goods": sorted(res.modified_goods),
           "lifted_zero": res.lifted_zero, "slack": _rat(res.slack)})
    return 0


def cmd_vstar(args):
    inst = _instance(args)
    profile = _need_profile(args, inst)
    order = _order(args, inst.n)
    try:
        res = constructions.construct_truthful_equivalent(inst, profile, order)
    except constructions.ConstructionError as exc:
        exists = constructions.truthful_equivalent_exists(inst, profile, order)
        _emit({"ok": False, "error": str(exc), "round": exc.round,
               "valuation_exists": exists is not None,
               "witness_ranking": list(exists) if exists is not None else None})
        print(f"construction failed: {exc}", file=sys.stderr)
        return 1
    _emit({"ok": True, "v_star": _row(res.v_star), "b_star": _row(res.b_star),
           "allocation": res.allocation.as_lists(), "checks": res.checks,
           "rounds": [{"round": s.round, "case": s.case, "values": _row(s.values),
                       "bid": _row(s.bid)} for s in res.states]})
    return 0


def _pair(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"expected LOW,HIGH integers, got {text!r}") from None
    return lo, hi


def cmd_verify_theorem(args):
    overrides = {"seed": args.seed, "count": args.count, "workers": args.workers,
                 "n": _pair(args.n) if args.n else None, "m": _pair(args.m) if args.m else None,
                 "values": _pair(args.values) if args.values else None,
                 "strict": True if args.strict else None, "ties": True if args.ties else None,
                 "attempts": args.attempts}
    if args.budget:
        overrides["max_profiles"] = args.budget
    cfg = harness.default_config(args.theorem, **overrides)
    report = harness.run_experiment(cfg)
    _emit(report.to_dict(verbose=args.verbose))
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(report.to_csv())
    c = report.counts
    print(f"{args.theorem}: {c['pass']} pass, {c['fail']} fail, {c['skip']} skip "
          f"in {report.wall_clock:.2f}s", file=sys.stderr)
    return 0 if report.ok else 1


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fairpne", description="Fair allocation mechanisms and their equilibria.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.set_defaults(fn=fn)
        return sp

    def inst_arg(sp):
        sp.add_argument("--instance", required=True, help="instance JSON file ('-' for stdin)")

    def profile_args(sp):
        sp.add_argument("--bids", help='bid profile JSON file: {"bids": [[...], ...]}')
        sp.add_argument("--rankings", help='ranking profile JSON file: {"rankings": [[...], ...]}')

    def mech_arg(sp):
        sp.add_argument("--mechanism", choices=("round-robin", "mcc"), default="round-robin")

    def order_arg(sp):
        sp.add_argument("--order", help="Round-Robin agent order, e.g. 2,1,3 (default 1,2,...)")

    sp = add("gen", cmd_gen, "Generate seeded random instances.")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--m", type=int, default=4)
    sp.add_argument("--values", default="0,9", help="LOW,HIGH integer value range")
    sp.add_argument("--count", type=int, default=1)
    sp.add_argument("--strict", action="store_true", help="no agent values two goods equally")
    sp.add_argument("--ties", action="store_true", help="force at least one tied value")

    sp = add("allocate", cmd_allocate, "Run a mechanism on a bid profile (truthful by default).")
    mech_arg(sp); inst_arg(sp); profile_args(sp); order_arg(sp)
    sp.add_argument("--trace", action="store_true", help="include the execution trace")

    sp = add("fairness", cmd_fairness, "Fairness report for an allocation.")
    inst_arg(sp)
    sp.add_argument("--allocation", required=True, help='allocation JSON file: {"bundles": ...}')
    sp.add_argument("--notions", default="ef,ef1,efx,prop,mms")
    sp.add_argument("--alpha", default="1", help="MMS approximation factor, e.g. 2/3")

    sp = add("mms", cmd_mms, "Exact maximin share with a witness partition.")
    inst_arg(sp)
    sp.add_argument("--agent", type=int, required=True)
    sp.add_argument("--parts", type=int, default=None, help="number of bundles (default n)")
    sp.add_argument("--budget", type=int, default=None, help="largest number of goods to search")

    for name, fn, help_ in (("best-response", cmd_best_response, "Brute-force best response."),
                            ("verify-pne", cmd_verify_pne, "Check a profile for profitable deviations."),
                            ("find-pne", cmd_find_pne, "Enumerate (round-robin) or build (mcc) PNE."),
                            ("construct-pne", cmd_construct_pne,
                             "Build one PNE with its fairness certificates.")):
        sp = add(name, fn, help_)
        mech_arg(sp); inst_arg(sp); order_arg(sp)
        sp.add_argument("--budget", type=int, default=None,
                        help="enumeration budget (rankings, profiles or goods by command)")
        if name in ("best-response", "verify-pne"):
            profile_args(sp)
        if name == "best-response":
            sp.add_argument("--agent", type=int, required=True)
        if name == "find-pne":
            sp.add_argument("--limit", type=int, default=None, help="show at most this many")

    sp = add("perturb", cmd_perturb, "Tie-breaking perturbation of one agent's values.")
    inst_arg(sp); profile_args(sp); order_arg(sp)
    sp.add_argument("--agent", type=int, required=True)
    sp.add_argument("--lift-zero", action="store_true",
                    help="also raise a lone zero-valued good (for equilibrium existence)")

    sp = add("vstar", cmd_vstar, "Truthful-equivalent valuation for the first picker.")
    inst_arg(sp); profile_args(sp); order_arg(sp)

    sp = add("verify-theorem", cmd_verify_theorem, "Batch-check a theorem on seeded instances.")
    sp.add_argument("theorem", help=f"one of {', '.join(harness.EXPERIMENTS)}")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=None)
    sp.add_argument("--n", help="LOW,HIGH agent range")
    sp.add_argument("--m", help="LOW,HIGH goods range")
    sp.add_argument("--values", help="LOW,HIGH value range")
    sp.add_argument("--strict", action="store_true")
    sp.add_argument("--ties", action="store_true")
    sp.add_argument("--attempts", type=int, default=None)
    sp.add_argument("--budget", type=int, default=None, help="ranking-profile budget")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--csv", help="also write a per-instance CSV summary to this path")
    sp.add_argument("--verbose", action="store_true", help="include every verdict")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else 0
    except (UsageError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON ({exc.msg})", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
