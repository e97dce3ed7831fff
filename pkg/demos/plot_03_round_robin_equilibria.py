"""
Equilibria of Round-Robin
=========================

Enumerate every pure Nash equilibrium over ranking profiles. Each one
should give an EF1 allocation, and the first agent in the order should not
envy anybody.
"""
from fairpne import Instance, is_ef1, rr_enumerate_pne
from fairpne.core import value_of

inst = Instance(((7, 1, 4, 3), (2, 6, 5, 1)))
pnes = rr_enumerate_pne(inst)
print(f"{len(pnes)} equilibria out of {24 ** 2} ranking profiles")

allocations = {tuple(map(tuple, c.allocation.as_lists())) for c in pnes}
for bundles in sorted(allocations):
    print("allocation", bundles)

# Every equilibrium allocation is EF1, and agent 1 never envies
assert all(is_ef1(inst, c.allocation).holds for c in pnes)
for c in pnes:
    own = value_of(inst, 0, c.allocation[0])
    assert all(own >= value_of(inst, 0, b) for b in c.allocation)
print("all equilibria are EF1 and envy-free for the first picker")

# Reversing the agent order moves that guarantee to agent 2
pnes = rr_enumerate_pne(inst, order=(1, 0))
assert all(value_of(inst, 1, c.allocation[1]) >= value_of(inst, 1, c.allocation[0]) for c in pnes)
print(len(pnes), "equilibria when agent 2 picks first")
