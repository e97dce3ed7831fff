"""
Cut and choose with reported values
===================================

Agent 1 cuts according to her bids, agent 2 takes the bundle she reports as
better. Agent 1 can force any split she likes, so at equilibrium she cuts a
maximin partition, and every equilibrium is MMS and EFX.
"""
from fractions import Fraction

from fairpne import Instance, cut_phase, is_alpha_mms, is_efx, mcc_canonical_bid, mcc_construct_pne
from fairpne.strategy import mcc_verify_pne

# A bid vector that forces the split ({g1, g4}, {g2, g3})
bid = mcc_canonical_bid({0, 3}, {1, 2}, 4)
print("forcing bid:", [str(x) for x in bid], "->", [sorted(s) for s in cut_phase(bid)])

v = (Fraction(6, 5), 1, 1, Fraction(1, 10))
inst = Instance((v, v))
b1, b2, cert = mcc_construct_pne(inst)
print("equilibrium allocation:", cert.allocation.as_lists(), "PNE:", cert.is_pne)
print("MMS:", is_alpha_mms(inst, cert.allocation, 1).holds, "EFX:", is_efx(inst, cert.allocation).holds)

# A lazy all-zero cut hands everything to agent 2, and agent 1 has a better move
lazy = mcc_verify_pne(inst, (0, 0, 0, 0), v)
print("zero bid is PNE:", lazy.is_pne, "| agent 1 gains", lazy.witness.gain)
