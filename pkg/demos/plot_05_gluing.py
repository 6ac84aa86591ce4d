"""
Gluing periodic orbits
======================

Repeat each target orbit in proportion to its weight, join the blocks and
close. The resulting single orbit approximates the convex combination.
"""

from fractions import Fraction

from orbitglue import gluing, markov, measures, schottky

S = markov.MarkovSystem.full_shift(2)
fam = measures.cylinder_family(S, 2)
targets = [(S.periodic_orbit((0,)), Fraction(1, 2)), (S.periodic_orbit((1,)), Fraction(1, 2))]

# the distance halves each time N doubles
for N in (4, 8, 16, 32, 64):
    plan = gluing.plan_itinerary(S, targets, N)
    cert = gluing.certify(gluing.execute_gluing(plan), plan, fam)
    print(f"N={N:3d} period {cert.total_period:4d} measured {cert.measured} bound {cert.bound}")

# on the golden-mean shift the planner inserts connectors
G = markov.MarkovSystem.golden_mean()
plan = gluing.plan_itinerary(G, [(G.periodic_orbit((0, 1)), Fraction(1, 2)),
                                 (G.periodic_orbit((1, 0, 0)), Fraction(1, 2))], 3)
print(plan.describe())

# the same construction for closed geodesics
X = schottky.SchottkySystem.symmetric()
plan = gluing.plan_itinerary(X, [(X.periodic_orbit("a"), Fraction(1, 2)),
                                 (X.periodic_orbit("b"), Fraction(1, 2))], 8)
cert = gluing.certify(gluing.execute_gluing(plan), plan, schottky.default_geometric_family(X))
print("geometric:", cert.as_record())
