"""
Truthful-equivalent valuations
==============================

When the first picker plays a best response, there is usually a valuation
v* under which bidding v* truthfully leads to the same allocation, with the
same total for her bundle and the same values elsewhere. The construction
below rebuilds v* round by round and checks each step by simulation.
"""
from fairpne import BidProfile, Instance, construct_truthful_equivalent
from fairpne.constructions import ConstructionError, truthful_equivalent_exists

inst = Instance(((6, 5, 4), (4, 6, 5)))
res = construct_truthful_equivalent(inst, BidProfile(((5, 6, 4), (4, 6, 5))))
print("v* =", [str(x) for x in res.v_star], "allocation", res.allocation.as_lists())
for s in res.states:
    print(f"  round {s.round}: case {s.case}, values {[str(x) for x in s.values]}")
print("checks:", res.checks)

# The requirements cannot always be met. Here agent 3 picks first with a best
# response, and an exhaustive search finds no valuation that works.
hard = Instance(((11, 0, 5, 10, 9), (0, 13, 8, 10, 12), (3, 5, 7, 10, 12)))
order = (2, 0, 1)
rankings = [(3, 0, 4, 1, 2), (4, 2, 1, 3, 0), (3, 0, 2, 1, 4)]
try:
    construct_truthful_equivalent(hard, rankings, order)
except ConstructionError as exc:
    print("construction stopped:", exc)
print("some valuation exists:", truthful_equivalent_exists(hard, rankings, order) is not None)
