"""
Manipulating Round-Robin
========================

Two agents, three goods a, b, c. Bidding truthfully, agent 1 takes a, agent
2 takes b, and agent 1 is left with c. Agent 1 does better by asking for b
first, since a is something agent 2 will not take anyway.
"""
from fairpne import BidProfile, Instance, round_robin, rr_best_response, rr_is_pne

inst = Instance(((6, 5, 4), (4, 6, 5)), ("a", "b", "c"))

# Truthful bids: the picks alternate and agent 1 ends up with {a, c}
alloc, trace = round_robin(inst.truthful_profile())
for step in trace.steps:
    print(f"round {step.round}: agent {step.agent + 1} picks {inst.good_names[step.good]}")
print("truthful bundles:", alloc.as_lists())

# Bidding (5, 6, 4) puts b on top and wins {a, b}, worth 11 instead of 10
alloc, _ = round_robin(BidProfile(((5, 6, 4), (4, 6, 5))))
print("manipulated bundles:", alloc.as_lists())

# The outcome depends only on rankings, so a best response is a search over m! orders
ranking, value = rr_best_response(inst, 0, [(0, 1, 2), (1, 2, 0)])
print("best ranking for agent 1:", [inst.good_names[g] for g in ranking], "value", value)

# ... which is exactly why truth-telling is not an equilibrium here
cert = rr_is_pne(inst, [(0, 1, 2), (1, 2, 0)])
print("truthful profile is PNE:", cert.is_pne, "| deviator:", cert.witness.agent + 1,
      "gains", cert.witness.gain)
