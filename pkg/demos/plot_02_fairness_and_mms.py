"""
Fairness notions and maximin shares
===================================

Exact checks for EF, EF1, EFX and PROP, and the maximin share computed by
enumerating partitions. Values are rationals, so 6/5 stays 6/5.
"""
from fractions import Fraction

from fairpne import Instance, is_alpha_mms, is_ef, is_ef1, is_efx, is_prop, mms
from fairpne.core import Allocation

v = (Fraction(6, 5), 1, 1, Fraction(1, 10))
inst = Instance((v, v), ("h1", "h2", "h3", "h4"))

# Both agents split 4 goods; the best worst bundle is {h1,h4} vs {h2,h3}
cert = mms(inst, 0)
print("maximin share:", cert.value, "via", [sorted(b) for b in cert.witness_partition])

for bundles in (({0, 3}, {1, 2}), ({0}, {1, 2, 3})):
    alloc = Allocation(bundles)
    verdicts = {f.__name__: f(inst, alloc).holds for f in (is_ef, is_ef1, is_efx, is_prop)}
    print(alloc.as_lists(), verdicts, "MMS:", is_alpha_mms(inst, alloc, 1).holds)

# Failed checks carry the first violation as a witness
rep = is_efx(inst, Allocation(({0}, {1, 2, 3})))
w = rep.witness
print(f"agent {w.agent + 1} still envies agent {w.other + 1} after dropping {inst.good_names[w.good]}")
