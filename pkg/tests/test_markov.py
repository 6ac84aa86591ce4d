import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orbitglue import markov
from orbitglue.core import DynamicsError
from orbitglue.markov import MarkovSystem, SymbolicPoint, bracket, shift_distance

FULL2 = MarkovSystem.full_shift(2)
GOLDEN = MarkovSystem.golden_mean()
RENEWAL = MarkovSystem.renewal(5)


def const(s):
    return SymbolicPoint((s,), (), (s,), 0)


def brute_lyndon_count(k, T):
    """Rotation classes of primitive words of length <= T, by brute force."""
    classes = set()
    for n in range(1, T + 1):
        for w in itertools.product(range(k), repeat=n):
            if any(w == w[d:] + w[:d] for d in range(1, n)):
                continue
            classes.add(min(w[d:] + w[:d] for d in range(n)))
    return len(classes)


# -- systems ----------------------------------------------------------------


def test_component_restriction():
    # 2 is a sink, so the largest strongly connected part is {0, 1}
    adj = [[1, 1, 1], [1, 0, 0], [0, 0, 1]]
    S = MarkovSystem(adj)
    assert S.symbols == (0, 1)
    assert not S.is_active(2)


def test_callable_adjacency_needs_size():
    with pytest.raises(DynamicsError):
        MarkovSystem(lambda i, j: True)
    S = MarkovSystem(lambda i, j: i == 0 or j == i - 1, size=4)
    assert S.symbols == (0, 1, 2, 3)


def test_renewal_transitions():
    assert set(RENEWAL.successors(0)) == {0, 1, 2, 3, 4}
    assert RENEWAL.successors(3) == (2,)


# -- metric -------------------------------------------------------------------


def test_distance_examples():
    x = const(0)
    assert shift_distance(x, x) == 0
    y = SymbolicPoint((0,), (0, 0, 0, 1), (0,), 0)  # differs at n = 3
    z = SymbolicPoint((0,), (1,) + (0,) * 7 + (1,), (0,), -5)  # differs at n = -5 and 3
    assert shift_distance(x, z) == 0.125
    assert shift_distance(x, y) == 0.125
    assert shift_distance(const(0), const(1)) == 1


points = st.builds(
    lambda l, c, r, s: SymbolicPoint(tuple(l), tuple(c), tuple(r), s),
    st.lists(st.integers(0, 1), min_size=1, max_size=3),
    st.lists(st.integers(0, 1), max_size=6),
    st.lists(st.integers(0, 1), min_size=1, max_size=3),
    st.integers(-4, 4),
)


@given(points, points, points)
def test_metric_axioms(x, y, z):
    assert shift_distance(x, y) == shift_distance(y, x)
    assert shift_distance(x, x) == 0
    assert shift_distance(x, z) <= shift_distance(x, y) + shift_distance(y, z) + 1e-12


@given(points, st.integers(-6, 6), st.integers(-6, 6))
def test_shift_group_law(x, s, t):
    assert FULL2.evolve(FULL2.evolve(x, s), t) == FULL2.evolve(x, s + t)


def test_window_matches_indexing():
    x = SymbolicPoint((1, 2), (0, 3, 4), (2, 0), -1)
    assert x.window(-6, 9) == tuple(x[n] for n in range(-6, 9))


# -- bracket ------------------------------------------------------------------


def test_bracket_examples():
    x = const(0)
    y = SymbolicPoint((0,), (0,), (1,), 0)
    z = bracket(x, y)
    assert z.window(-3, 4) == (0, 0, 0, 0, 1, 1, 1)
    assert bracket(x, x) == x
    with pytest.raises(DynamicsError, match="product neighborhood"):
        bracket(const(0), const(1))


@given(points, points)
def test_bracket_contract(x, y):
    y = SymbolicPoint(y.left, (x[0],), y.right, 0)
    z = bracket(x, y)
    for n in range(33):
        assert shift_distance(z.shift(n), y.shift(n)) <= 2.0 ** -n
        assert shift_distance(z.shift(-n), x.shift(-n)) <= 2.0 ** -n


# -- closing ------------------------------------------------------------------


def test_close_fixed_point():
    res = markov.close_segment(FULL2, const(0), 1, 3)
    assert res.word == (0,) and res.orbit.period == 1


def test_close_01001_radii():
    w = (0, 1, 0, 0, 1)
    core = [w[n % 5] for n in range(-2, 8)]
    x = markov.point_from_path(FULL2, [1, 1, 1] + core + [1, 1, 1]).shift(5)
    res = markov.close_segment(FULL2, x, 5, 2)
    assert res.word == w and res.orbit.period == 5
    for s, r in enumerate(res.radii):
        # brute force: coordinates agree on |n| < r
        for n in range(1 - r, r):
            assert x[s + n] == res.orbit.base[s + n]


def test_close_errors():
    x = markov.point_from_path(FULL2, [0, 1, 1, 0, 0])
    with pytest.raises(DynamicsError, match="index"):
        markov.close_segment(FULL2, x, 2, 1)
    p = markov.point_from_path(GOLDEN, [1, 0, 1, 0, 1])
    with pytest.raises(DynamicsError):
        markov.close_segment(GOLDEN, p, 1, 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 7), st.integers(0, 6))
def test_closing_contract(seed, period, m):
    x, t = markov.random_returning_point(RENEWAL, period, m, seed)
    res = markov.close_segment(RENEWAL, x, t, m)
    assert res.word == x.window(0, t)
    assert res.orbit.base.shift(res.orbit.period) == res.orbit.base
    for s, r in enumerate(res.radii):
        lo, hi = 1 - r, r
        assert x.shift(s).window(lo, hi) == res.orbit.base.shift(s).window(lo, hi)


# -- transitivity and enumeration --------------------------------------------


def test_connect_words():
    assert markov.connect_words(FULL2, 0, 1) == ()
    assert markov.connect_words(GOLDEN, 1, 1) == (0,)
    two = MarkovSystem.from_pairs(4, [(0, 1), (1, 0), (2, 3), (3, 2)])
    with pytest.raises(DynamicsError):
        markov.connect_words(two, 0, 2)


def test_enumerate_examples():
    words = lambda S, T: [o.base.window(0, int(o.period)) for o in markov.enumerate_periodic(S, T)]
    assert words(FULL2, 1) == [(0,), (1,)]
    assert words(FULL2, 2) == [(0,), (0, 1), (1,)]
    assert words(GOLDEN, 2) == [(0,), (0, 1)]


@pytest.mark.parametrize("k,T", [(2, 6), (3, 4)])
def test_enumerate_counts_match_brute_force(k, T):
    S = MarkovSystem.full_shift(k)
    assert len(markov.enumerate_periodic(S, T)) == brute_lyndon_count(k, T)


def test_golden_orbits_admissible():
    for o in markov.enumerate_periodic(GOLDEN, 6):
        w = o.base.window(0, int(o.period))
        assert GOLDEN.word_admissible(w, cyclic=True)


# -- Markov measures ---------------------------------------------------------


def test_stationary_examples():
    mu = markov.stationary_measure(FULL2, np.full((2, 2), 0.5))
    assert np.allclose(mu.pi, [0.5, 0.5])
    mu = markov.stationary_measure(FULL2, np.array([[0.9, 0.1], [0.5, 0.5]]))
    assert np.allclose(mu.pi, [5 / 6, 1 / 6], atol=1e-14)
    with pytest.raises(DynamicsError, match="row"):
        markov.stationary_measure(FULL2, np.array([[0.8, 0.1], [0.5, 0.5]]))


def test_forbidden_transition_rejected():
    with pytest.raises(DynamicsError):
        markov.stationary_measure(GOLDEN, np.full((2, 2), 0.5))


def test_sample_path_determinism_and_frequency():
    mu = markov.bernoulli_measure(FULL2, [0.5, 0.5])
    a = markov.sample_path(mu, 100_000, seed=3)
    b = markov.sample_path(mu, 100_000, seed=3)
    wa = a.start.window(0, 100_000)
    assert wa == b.start.window(0, 100_000)
    assert abs(wa.count(0) / 1e5 - 0.5) < 0.01


def test_golden_sample_admissible():
    mu = markov.uniform_measure(GOLDEN)
    w = markov.sample_path(mu, 5000, seed=1).start.window(0, 5000)
    assert all(not (a == 1 and b == 1) for a, b in zip(w, w[1:]))


def test_pair_frequencies_within_three_sigma():
    P = np.array([[0.9, 0.1], [0.5, 0.5]])
    mu = markov.stationary_measure(FULL2, P)
    n = 200_000
    w = np.array(markov.sample_path(mu, n, seed=11).start.window(0, n))
    for i, j in itertools.product(range(2), repeat=2):
        p = mu.pi[i] * P[i, j]
        freq = np.mean((w[:-1] == i) & (w[1:] == j))
        # pair indicators are 1-dependent; inflate sigma for the covariance
        assert abs(freq - p) <= 3 * 2 * np.sqrt(p * (1 - p) / n)


def test_cylinder_weight():
    mu = markov.bernoulli_measure(FULL2, [0.5, 0.5])
    assert mu.cylinder_weight(0, (1, 1)) == pytest.approx(0.25, abs=1e-15)


def test_point_from_path_admissible():
    x = markov.point_from_path(GOLDEN, [0, 1, 0])
    assert GOLDEN.word_admissible(x.window(-10, 13))
    assert markov.word_label((0, 12)) == "0.12"
