"""
Closing returns in a Markov shift
=================================

A random point on the renewal shift comes back near itself after ``t``
steps. Closing replaces the segment by a periodic orbit that shadows it.
"""

from orbitglue import markov

S = markov.MarkovSystem.renewal(5)
print("states:", S.size, "admissible:", S.word_admissible((4, 3, 2, 1, 0, 0)))

# a point whose window [-m, t+m] repeats with period t
m = 8
x, t = markov.random_returning_point(S, period=6, m=m, seed=3)
print("return time t =", t, "segment:", markov.word_label(x.window(0, t)))

# the periodic point agrees with x on a window around every time s
res = markov.close_segment(S, x, t, m)
print("closed word:", markov.word_label(res.word))
print("shadowing radii:", res.radii)

# with x_0 = y_0 the bracket keeps the past of one point and the future of another
a = S.periodic_orbit((0,)).base
b = S.periodic_orbit((0, 4, 3, 2, 1)).base
z = markov.bracket(a, b)
print("bracket window:", z.window(-6, 6))
