"""
Periodic measures and the bounded-Lipschitz distance
====================================================

Integrals against combinations of periodic orbits are exact fractions, so
distances between such measures over a cylinder family are exact too.
"""

from fractions import Fraction

from orbitglue import markov, measures
from orbitglue.core import ClosingParams

S = markov.MarkovSystem.full_shift(2)
fam = measures.cylinder_family(S, 2)

# two periodic combinations and the distance between them
mu = measures.PeriodicCombination((S.periodic_orbit((0,)), S.periodic_orbit((0, 1))),
                                  (Fraction(1, 3), Fraction(2, 3)))
nu = measures.orbit_measure(S.periodic_orbit((0, 1, 1)))
print("d(mu, nu) =", measures.bl_distance(mu, nu, fam))

# shrinking the weight of a full-support orbit: the distance falls like 1/n
for n in (1, 2, 4, 8):
    term = measures.full_support_term(mu, S.periodic_orbit((0, 1, 1)), n)
    print(n, measures.bl_distance(term, mu, fam))

# Birkhoff average along a closed return against the Bernoulli measure
bern = measures.MarkovStationary(markov.bernoulli_measure(S, [0.5, 0.5]))
rep = measures.closing_approximation_gap(bern, measures.coordinate_value(),
                                         ClosingParams(0.1, 0.1, 8), seed=0)
print("return time", rep.return_time, "gap", round(rep.gap, 4), "bound", rep.bound)
