"""
Batch experiments
=================

Every guarantee is also available as a seeded experiment. Reports keep
passes, failures and budget skips apart, and any failure comes with a
self-contained counterexample.
"""
import json

from fairpne.core import serialize_instance
from fairpne.harness import default_config, gen_instances, run_experiment

cfg = default_config("T3.1", seed=7, count=30)
print("first instance:", serialize_instance(next(gen_instances(cfg))))

for theorem in ("T3.1", "L3.6", "T4.3", "T2.7"):
    report = run_experiment(default_config(theorem, seed=7, count=30))
    print(f"{theorem:6s} {report.counts}  {report.wall_clock:.2f}s")

# Reports serialize to stable JSON (no timings unless asked for)
doc = run_experiment(default_config("L4.2", m=(0, 4))).to_dict()
print(json.dumps(doc["counts"]))
