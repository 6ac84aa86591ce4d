"""
Closed geodesics on a Schottky surface
======================================

Cyclically reduced words in the generators are closed geodesics. Their
length is the translation length of the group element.
"""

import math

from orbitglue import schottky
from orbitglue.core import ClosingParams, OrbitSegment

X = schottky.SchottkySystem.symmetric()
X.validate()

for w in ("a", "b", "ab", "aB", "abAB"):
    g = X.element(w)
    print(f"{w:5s} length {schottky.translation_length(g):.6f}"
          f"  trace formula {2 * math.acosh(abs(g.trace) / 2):.6f}")

# perturb a vector on the axis of aab, then close the segment again
geo = X.closed_geodesic("aab")
v = X.vector(geo.repelling + 1e-3, geo.attracting, 1e-3)
res = schottky.close_geodesic_segment(X, OrbitSegment(X, v, geo.length),
                                      ClosingParams(1e-2, 1e-2, 1.0), 4)
print("recovered", "".join(res.geodesic.word), "slack", res.period_slack)

# the forward endpoint is coded by the ping-pong intervals it falls in
print("coding of attracting point:", schottky.forward_coding(X, geo.attracting, 6))
print("cyclic words up to length 4:", len(X.cyclic_words(4)))
