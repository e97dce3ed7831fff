"""Acceptance criteria, one test each, exact arithmetic throughout.

Every test prints a single ``PASS``/``FAIL`` line for its criterion; run
``pytest tests/test_acceptance.py -v`` to see them next to the test ids.
"""
import contextlib
import io
import itertools
import json
import os
import timeit
from fractions import Fraction as F

import pytest

from fairpne.cli import main
from fairpne.core import BidProfile, Instance
from fairpne.harness import default_config, run_experiment
from fairpne.mechanisms import cut_phase, round_robin
from fairpne.strategy import mcc_canonical_bid, rr_is_pne

WORKERS = max(1, min(4, os.cpu_count() or 1))


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail}")
        assert ok, detail
    return emit


def run(theorem, **kw):
    return run_experiment(default_config(theorem, workers=WORKERS, **kw))


def summary(reports):
    tot = {"pass": 0, "fail": 0, "skip": 0}
    for r in reports:
        for k, v in r.counts.items():
            tot[k] += v
    return tot


def clean(reports, minimum):
    tot = summary(reports)
    return tot["fail"] == 0 and tot["skip"] == 0 and tot["pass"] >= minimum, tot


def test_c01_worked_example(report):
    inst = Instance(((6, 5, 4), (4, 6, 5)))

    def go():
        truthful, _ = round_robin(inst.truthful_profile())
        manipulated, _ = round_robin(BidProfile(((5, 6, 4), (4, 6, 5))))
        cert = rr_is_pne(inst, [(0, 1, 2), (1, 2, 0)])
        return truthful, manipulated, cert

    truthful, manipulated, cert = go()
    ms = min(timeit.repeat(go, number=20, repeat=5)) / 20 * 1000
    ok = (truthful.as_lists() == [[0, 2], [1]] and manipulated[0] == {0, 1}
          and not cert.is_pne and cert.witness.agent == 0 and cert.witness.strategy == (1, 0, 2)
          and ms < 1)
    report(1, ok, f"worked example allocations and not-PNE witness (agent 1), {ms:.3f} ms")


def test_c02_pne_are_ef1(report):
    reps = [run("T3.1", n=(2, 2), m=(m, m), count=200, seed=100 + m) for m in (3, 4, 5)]
    reps.append(run("T3.1", n=(3, 3), m=(4, 4), count=50, seed=104))
    ok, tot = clean(reps, 650)
    pne = sum(v.detail["pne"] for r in reps for v in r.verdicts)
    report(2, ok, f"PNE non-empty and EF1 on {tot['pass']} instances ({pne} equilibria), {tot}")


def test_c03_first_picker_envy_free(report):
    rep = run("T3.3", n=(1, 3), m=(1, 4), count=200, seed=3)
    ok, tot = clean([rep], 200)
    report(3, ok, f"first picker envy-free at every PNE, {tot}")


def test_c04_ties_and_transfer(report):
    rep = run("TA.2", count=100, seed=4)
    ok, tot = clean([rep], 100)
    report(4, ok, f"PNE exist with ties; perturbed PNE re-verify on originals, {tot}")


def test_c05_partial_slides(report):
    rep = run("L3.6", n=(1, 3), m=(1, 6), count=1000, seed=5)
    ok, tot = clean([rep], 1000)
    moved = sum(1 for v in rep.verdicts if v.detail.get("distance") == 1)
    report(5, ok, f"history traces within one good after a slide ({moved} moved), {tot}")


def test_c06_truthful_equivalent(report):
    rep = run("L3.4", n=(2, 3), m=(2, 5), count=200, seed=6)
    ok, tot = clean([rep], 100)
    case2 = sum(1 for v in rep.verdicts if "2" in v.detail.get("cases", "").split(","))
    report(6, ok, f"construction succeeds with all checks ({case2} used value transfer), {tot}")


def test_c07_canonical_partitions(report):
    rep = run("L4.2", m=(0, 10))
    ok, tot = clean([rep], 11)
    # independent re-check straight through the cut phase
    bad = 0
    for m in range(11):
        for labels in itertools.product((0, 1), repeat=m):
            X1 = frozenset(g for g in range(m) if not labels[g])
            X2 = frozenset(range(m)) - X1
            bad += set(cut_phase(mcc_canonical_bid(X1, X2, m))) != {X1, X2}
    report(7, ok and bad == 0, f"all 2-partitions of m<=10 reproduced ({bad} mismatches), {tot}")


def test_c08_mcc_equilibria_fair(report):
    built = run("T4.3", m=(1, 8), count=300, seed=8)
    sampled = run("T4.3-random", count=1000, seed=8)
    ok1, t1 = clean([built], 300)
    ok2, t2 = clean([sampled], 1000)
    report(8, ok1 and ok2, f"constructed PNE MMS+EFX {t1}; sampled PNE MMS+EFX {t2}")


def test_c09_mms_efx_relations(report):
    t26 = run("T2.6")
    t27 = run("T2.7")
    ok, tot = clean([t26, t27], 2)
    tight = t27.extras.get("tightness_m4")
    ratio = F(tight["ratio"]) if tight else None
    ok = ok and ratio is not None and ratio <= F(2, 3) + F(1, 10)
    report(9, ok, f"MMS=>EFX and EFX=>2/3-MMS over {t26.counts['pass']} instances; "
                  f"m=4 EFX ratio {tight and tight['ratio']}")


def test_c10_few_positive_goods(report):
    rep = run("L4.5")
    ok, tot = clean([rep], 1)
    report(10, ok, f"EFX from own view gives maximin share, {tot}")


def test_c11_mcc_pne_exact_mms(report):
    rep = run("MCC-4.6", count=200, seed=11)
    ok, tot = clean([rep], 200)
    report(11, ok, f"every verified PNE at m=4 is exact-MMS, {tot}")


def _cli_bytes(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue().encode()


def test_c12_cli_determinism(report, tmp_path):
    def put(name, doc):
        p = tmp_path / name
        p.write_text(json.dumps(doc))
        return str(p)

    ex = put("ex.json", {"agents": 2, "goods": ["a", "b", "c"], "valuations": [[6, 5, 4], [4, 6, 5]]})
    vs = put("vs.json", {"valuations": [["6/5", 1, 1, "1/10"], ["6/5", 1, 1, "1/10"]]})
    bids = put("b.json", {"bids": [[5, 6, 4], [4, 6, 5]]})
    alloc = put("a.json", {"bundles": [[0, 2], [1]]})
    ties = put("t.json", {"valuations": [[1, 1, 0], [2, 2, 1]]})
    commands = [
        ["gen", "--seed", "3", "--n", "3", "--m", "4", "--count", "4"],
        ["allocate", "--instance", ex, "--bids", bids, "--trace"],
        ["allocate", "--mechanism", "mcc", "--instance", vs, "--trace"],
        ["fairness", "--instance", ex, "--allocation", alloc],
        ["mms", "--instance", vs, "--agent", "1"],
        ["best-response", "--instance", ex, "--bids", bids, "--agent", "2"],
        ["verify-pne", "--instance", ex, "--bids", bids],
        ["verify-pne", "--mechanism", "mcc", "--instance", ex, "--bids", bids],
        ["find-pne", "--instance", ex],
        ["construct-pne", "--mechanism", "mcc", "--instance", vs],
        ["construct-pne", "--instance", ties],
        ["perturb", "--instance", ties, "--agent", "1", "--lift-zero"],
        ["vstar", "--instance", ex, "--bids", bids],
    ] + [["verify-theorem", t, "--seed", "12", "--count", "5"]
         for t in ("T3.1", "T3.3", "TA.2", "L3.6", "L3.4", "T4.3", "T4.3-random",
                   "L4.5", "MCC-4.6", "MCC-4.8")] + [
        ["verify-theorem", "L4.2", "--m", "0,6"],
        ["verify-theorem", "T2.7", "--m", "1,3"],
    ]
    differing = []
    for argv in commands:
        first, second = _cli_bytes(argv), _cli_bytes(argv)
        if first != second or first[0] != 0 or not first[1]:
            differing.append(argv[0])
    report(12, not differing, f"{len(commands)} CLI commands re-run byte-identical"
                              + (f"; differing: {differing}" if differing else ""))
