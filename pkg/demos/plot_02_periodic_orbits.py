"""
Counting periodic orbits
========================

Primitive orbits of period ``n`` are Lyndon words. On the full 2-shift
their number is the necklace count.
"""

from orbitglue import markov

S = markov.MarkovSystem.full_shift(2)
for n in range(1, 9):
    orbits = [o for o in markov.enumerate_periodic(S, n) if o.period == n]
    print(f"n={n}: {len(orbits)} primitive orbits")

# the golden-mean shift forbids the block 11
G = markov.MarkovSystem.golden_mean()
words = [markov.word_label(o.base.window(0, int(o.period))) for o in markov.enumerate_periodic(G, 5)]
print("golden mean, period <= 5:", words)
