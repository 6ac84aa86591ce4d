"""Invariant measures and their comparison through bounded Lipschitz tests.

Three kinds of measures are representable:

* :class:`PeriodicCombination` -- finite convex combination of periodic
  orbit measures with exact rational weights;
* :class:`MarkovStationary` -- a stationary Markov measure on a shift;
* :class:`Empirical` -- the time average along an orbit segment.

Map averages are exact (:class:`fractions.Fraction` whenever the test
function returns rationals).  Flow averages use the composite midpoint rule,
which is spectrally accurate over a full period for the smooth test
functions of :mod:`orbitglue.schottky`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from .core import ClosingParams, DynamicsError, OrbitSegment, PeriodicOrbit
from .markov import MarkovMeasure, MarkovSystem, SymbolicPoint, close_segment, sample_path

#: maximal midpoint step for flow averages
QUAD_STEP = 0.005


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Bounded Lipschitz observable.

    ``lipschitz`` and ``sup`` are declared constants (``K`` and ``F``).
    Symbolic cylinder functions additionally carry ``lo``/``length`` and
    ``block``: ``f(x) = block(x_lo .. x_{lo+length-1})``, which enables exact
    integration against Markov measures and fast orbit averages.  Flow test
    functions may carry ``batch(points, angles)``, a vectorized evaluator on
    domain representatives.
    """

    __test__ = False  # not a pytest class

    evaluate: Callable[[Any], Any]
    lipschitz: float
    sup: float
    name: str = "f"
    lo: int | None = None
    length: int | None = None
    block: Callable[[tuple], Any] | None = None
    batch: Callable | None = None

    def __call__(self, x):
        return self.evaluate(x)

    @property
    def scale(self) -> float:
        return max(self.lipschitz, self.sup, 1.0)

    @property
    def is_cylinder(self) -> bool:
        return self.block is not None


def cylinder_function(block, lo: int, length: int, lipschitz, sup, name) -> TestFunction:
    hi = lo + length

    def evaluate(x: SymbolicPoint):
        return block(x.window(lo, hi))

    return TestFunction(evaluate, lipschitz, sup, name, lo, length, block)


def cylinder_indicator(word: Sequence[int], lo: int = 0) -> TestFunction:
    """Indicator of ``{x : x_lo .. = word}``; Lipschitz constant ``2**r``."""
    word = tuple(word)
    reach = max(abs(lo), abs(lo + len(word) - 1))
    label = "".join(map(str, word)) if max(word) < 10 else ".".join(map(str, word))
    return cylinder_function(
        lambda w: 1 if w == word else 0, lo, len(word), 2**reach, 1, f"[{label}]@{lo}"
    )


def coordinate_value(top: int = 1) -> TestFunction:
    """``f(x) = x_0``; bounded by ``top`` and ``top``-Lipschitz."""
    return cylinder_function(lambda w: w[0], 0, 1, top, top, "x0")


def constant_function(c=1) -> TestFunction:
    return TestFunction(lambda x: c, 0, abs(c), f"const({c})", 0, 1, lambda w: c)


@dataclass(frozen=True)
class TestFamily:
    """Ordered finite list of test functions."""

    __test__ = False

    functions: tuple

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        if not self.functions:
            raise DynamicsError("test family is empty")

    def __iter__(self):
        return iter(self.functions)

    def __len__(self):
        return len(self.functions)

    @property
    def max_sup(self) -> float:
        return max(f.sup for f in self.functions)

    @property
    def max_length(self) -> int:
        return max(f.length or 1 for f in self.functions)


def cylinder_family(system: MarkovSystem, L: int) -> TestFamily:
    """Indicators of all admissible words of length ``1 .. L`` at index 0."""
    funcs = []
    words = [(s,) for s in system.symbols]
    for n in range(1, L + 1):
        funcs.extend(cylinder_indicator(w) for w in words)
        words = [w + (s,) for w in words for s in system.successors(w[-1])]
    return TestFamily(funcs)


# ---------------------------------------------------------------------------
# measures


@dataclass(frozen=True, eq=False)
class PeriodicCombination:
    orbits: tuple
    weights: tuple

    def __post_init__(self):
        orbits = tuple(self.orbits)
        weights = tuple(Fraction(w) for w in self.weights)
        if not orbits or len(orbits) != len(weights):
            raise DynamicsError("need one weight per orbit")
        if any(w < 0 for w in weights):
            raise DynamicsError("weights must be nonnegative")
        if sum(weights) != 1:
            raise DynamicsError(f"weights sum to {sum(weights)}, not 1")
        if len({id(o.system) for o in orbits}) != 1:
            raise DynamicsError("orbits live on different systems")
        object.__setattr__(self, "orbits", orbits)
        object.__setattr__(self, "weights", weights)

    @property
    def system(self):
        return self.orbits[0].system


@dataclass(frozen=True, eq=False)
class MarkovStationary:
    markov: MarkovMeasure
    mc_samples: int = 20000
    mc_seed: int = 0

    @property
    def system(self):
        return self.markov.system


@dataclass(frozen=True, eq=False)
class Empirical:
    segment: OrbitSegment

    @property
    def system(self):
        return self.segment.system


@dataclass(frozen=True, eq=False)
class Mixture:
    """Convex combination of arbitrary measures with exact weights."""

    components: tuple
    weights: tuple

    def __post_init__(self):
        weights = tuple(Fraction(w) for w in self.weights)
        if not self.components or len(self.components) != len(weights):
            raise DynamicsError("need one weight per component")
        if any(w < 0 for w in weights) or sum(weights) != 1:
            raise DynamicsError("mixture weights must be nonnegative and sum to 1")
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "weights", weights)

    @property
    def system(self):
        return self.components[0].system


InvariantMeasure = PeriodicCombination | MarkovStationary | Empirical | Mixture


def orbit_measure(orbit: PeriodicOrbit) -> PeriodicCombination:
    """Normalized orbit measure of a single periodic orbit."""
    return PeriodicCombination((orbit,), (Fraction(1),))


def empirical_measure(segment: OrbitSegment) -> Empirical:
    return Empirical(segment)


def _exact_mean(values, n):
    total = sum(values)
    if isinstance(total, (int, Fraction)):
        return Fraction(total, 1) / n
    return total / n


def _symbolic_average(f: TestFunction, x: SymbolicPoint, t: int):
    """``(1/t) sum_{s<t} f(shift^s x)`` for a map."""
    if f.is_cylinder:
        seq = x.window(f.lo, f.lo + t + f.length - 1)
        vals = (f.block(seq[s : s + f.length]) for s in range(t))
    else:
        vals = (f(x.shift(s)) for s in range(t))
    return _exact_mean(vals, t)


def _flow_average(f: TestFunction, system, x, t: float, step: float | None = None):
    n = max(1, math.ceil(t / (step or QUAD_STEP)))
    times = (np.arange(n) + 0.5) * (t / n)
    if f.batch is not None and hasattr(system, "trajectory_arrays"):
        return float(np.mean(f.batch(*system.trajectory_arrays(x, times))))
    return float(np.mean([f(system.evolve(x, s)) for s in times]))


def time_average(f: TestFunction, system, x, t):
    if t <= 0:
        raise DynamicsError("averaging time must be positive")
    if system.discrete:
        return _symbolic_average(f, x, int(t))
    return _flow_average(f, system, x, t)


def birkhoff_average(f: TestFunction, system, x, t):
    """Time average of ``f`` along the trajectory of ``x`` up to time ``t``."""
    return time_average(f, system, x, t)


def orbit_average(f: TestFunction, orbit: PeriodicOrbit):
    return time_average(f, orbit.system, orbit.base, orbit.period)


def _markov_integral(f: TestFunction, m: MarkovStationary):
    mu = m.markov
    if f.is_cylinder:
        total = 0.0
        stack = [((s,), mu.pi[s]) for s in mu.system.symbols if mu.pi[s] > 0]
        while stack:
            w, weight = stack.pop()
            if len(w) == f.length:
                total += weight * float(f.block(w))
                continue
            for s in mu.system.successors(w[-1]):
                p = mu.P[w[-1], s]
                if p > 0:
                    stack.append((w + (s,), weight * p))
        return total, 0.0
    seg = sample_path(mu, m.mc_samples, m.mc_seed)
    vals = np.array([float(f(seg.start.shift(s))) for s in range(m.mc_samples)])
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals)))


def integrate_with_error(f: TestFunction, mu) -> tuple[Any, float]:
    """Integral of ``f`` and a standard error (zero unless Monte Carlo)."""
    if isinstance(mu, PeriodicCombination):
        return sum(w * orbit_average(f, o) for o, w in zip(mu.orbits, mu.weights)), 0.0
    if isinstance(mu, MarkovStationary):
        return _markov_integral(f, mu)
    if isinstance(mu, Empirical):
        seg = mu.segment
        return time_average(f, seg.system, seg.start, seg.duration), 0.0
    if isinstance(mu, Mixture):
        parts = [integrate_with_error(f, m) for m in mu.components]
        value = sum(w * v for w, (v, _) in zip(mu.weights, parts))
        err = math.sqrt(sum(float(w) ** 2 * e**2 for w, (_, e) in zip(mu.weights, parts)))
        return value, err
    raise TypeError(f"not a measure: {mu!r}")


def integrate(f: TestFunction, mu):
    return integrate_with_error(f, mu)[0]


def _same_system(mu, nu):
    if mu.system is not nu.system:
        raise DynamicsError("measures live on different systems")


def family_gaps(mu, nu, family: TestFamily) -> list:
    """Raw differences ``|int f dmu - int f dnu|`` for each family member."""
    _same_system(mu, nu)
    return [abs(integrate(f, mu) - integrate(f, nu)) for f in family]


def bl_distance(mu, nu, family: TestFamily):
    """Finite-family lower bound on the bounded-Lipschitz distance.

    ``max_f |int f dmu - int f dnu| / max(K_f, F_f, 1)``.  Exact (a
    Fraction) when every integral is exact.
    """
    if not len(family):
        raise DynamicsError("test family is empty")
    gaps = family_gaps(mu, nu, family)
    return max(_scaled(g, f.scale) for g, f in zip(gaps, family))


def _scaled(value, scale):
    if isinstance(value, (int, Fraction)) and float(scale).is_integer():
        return Fraction(value) / int(scale)
    return float(value) / scale


def separates(family: TestFamily, orbits: Sequence[PeriodicOrbit]) -> bool:
    """Whether every pair of orbit measures is told apart by some member."""
    meas = [orbit_measure(o) for o in orbits]
    return all(
        bl_distance(meas[i], meas[j], family) > 0
        for i in range(len(meas))
        for j in range(i + 1, len(meas))
    )


# ---------------------------------------------------------------------------
# combinations and the full-support sequence


def convex_combine(measures: Sequence, weights: Sequence) -> PeriodicCombination:
    """Convex combination of periodic combinations, with exact weights."""
    weights = [Fraction(w) for w in weights]
    if len(weights) != len(measures) or not measures:
        raise DynamicsError("need one weight per measure")
    if any(w < 0 for w in weights):
        raise DynamicsError("negative weight")
    if sum(weights) != 1:
        raise DynamicsError(f"weights sum to {sum(weights)}, not 1")
    orbits, coeffs = [], []
    for mu, w in zip(measures, weights):
        if not isinstance(mu, PeriodicCombination):
            raise DynamicsError("only periodic combinations can be combined exactly")
        for o, c in zip(mu.orbits, mu.weights):
            orbits.append(o)
            coeffs.append(w * c)
    return PeriodicCombination(tuple(orbits), tuple(coeffs))


def full_support_term(nu: PeriodicCombination, x0: PeriodicOrbit, n: int) -> PeriodicCombination:
    """``(1 - 1/n) nu + (1/n) delta_{x0}``."""
    if n < 1:
        raise DynamicsError("n must be >= 1")
    a = Fraction(1, n)
    if n == 1:
        return orbit_measure(x0)
    return convex_combine([nu, orbit_measure(x0)], [1 - a, a])


def _visited_blocks(orbit: PeriodicOrbit, length: int, lo: int = 0) -> set:
    x, ell = orbit.base, int(orbit.period)
    seq = x.window(lo, lo + ell + length - 1)
    return {seq[s : s + length] for s in range(ell)}


def support_audit(mu, basis: Sequence) -> Fraction:
    """Fraction of basis sets charged by ``mu``.

    Symbolic basis elements are cylinders ``(lo, word)``; an orbit charges a
    cylinder iff its cyclic word visits it.  Other systems pass basis
    elements with a ``charges(orbit) -> bool`` method.
    """
    if not basis:
        raise DynamicsError("basis is empty")
    if not isinstance(mu, PeriodicCombination):
        raise DynamicsError("support audits need a periodic combination")
    live = [o for o, w in zip(mu.orbits, mu.weights) if w > 0]
    hit = 0
    cache: dict = {}
    for b in basis:
        if hasattr(b, "charges"):
            hit += any(b.charges(o) for o in live)
            continue
        lo, word = b
        word = tuple(word)
        for o in live:
            key = (id(o), lo, len(word))
            if key not in cache:
                cache[key] = _visited_blocks(o, len(word), lo)
            if word in cache[key]:
                hit += 1
                break
    return Fraction(hit, len(basis))


def cylinder_basis(system: MarkovSystem, length: int, lo: int = 0) -> list:
    """All admissible cylinders of the given length anchored at ``lo``."""
    words = [(s,) for s in system.symbols]
    for _ in range(length - 1):
        words = [w + (s,) for w in words for s in system.successors(w[-1])]
    return [(lo, w) for w in words]


# ---------------------------------------------------------------------------
# closing lemma experiment


@dataclass(frozen=True)
class GapReport:
    """One run of the periodic approximation of a Markov measure.

    ``birkhoff_error`` is ``|time average - int f dmu|`` along the returning
    segment; ``shadow_error`` is ``(1/t) sum K d(shift^s x, shift^s x0)``
    using the certified agreement radii; ``period_slack`` is ``|l - t|``.
    """

    seed: int
    return_time: int
    window: int
    gap: float
    bound: float
    birkhoff_error: float
    shadow_error: float
    period_slack: int
    eps: float
    word: tuple = field(repr=False)

    @property
    def hypotheses_hold(self) -> bool:
        return self.birkhoff_error <= self.eps and self.shadow_error <= self.eps

    @property
    def passed(self) -> bool:
        return self.gap <= self.bound


def _window_for(delta: float) -> int:
    """Smallest ``m`` with ``2**-m <= delta``."""
    if delta >= 1:
        return 0
    return math.ceil(-math.log2(delta) - 1e-12)


def _first_return(seq: tuple, width: int, begin: int) -> int | None:
    """Smallest ``t >= begin`` with ``seq[t:t+width] == seq[:width]``."""
    if max(seq) < 256:
        raw = bytes(seq)
        t = raw.find(raw[:width], begin)
        return None if t < 0 else t
    key = seq[:width]
    return next((t for t in range(begin, len(seq) - width + 1) if seq[t : t + width] == key), None)


def closing_approximation_gap(
    mu: MarkovStationary,
    f: TestFunction,
    params: ClosingParams,
    seed: int,
    horizon: int = 1 << 16,
) -> GapReport:
    """Approximate ``mu`` by the closed orbit of a typical returning segment.

    A stationary path is sampled, the first time ``t > t0`` at which it comes
    back ``delta``-close to its start is located, the segment is closed and
    the integral of ``f`` over the closed orbit is compared with
    ``int f dmu``; the bound is ``(K + 2F + 1) eps``.
    """
    system = mu.system
    m = _window_for(params.delta)
    t0 = int(math.floor(params.t0))
    seg = sample_path(mu.markov, horizon + 2 * m + 1, seed)
    x = seg.start.shift(m)
    t = _first_return(x.window(-m, horizon + m + 1), 2 * m + 1, t0 + 1)
    if t is None:
        raise DynamicsError("recurrence not observed")
    closing = close_segment(system, x, t, m)
    target = integrate(f, mu)
    orbit_avg = float(orbit_average(f, closing.orbit))
    seg_avg = float(_symbolic_average(f, x, t))
    shadow = f.lipschitz * float(np.mean(closing.bounds[:t]))
    return GapReport(
        seed=seed,
        return_time=t,
        window=m,
        gap=abs(target - orbit_avg),
        bound=(f.lipschitz + 2 * f.sup + 1) * params.eps,
        birkhoff_error=abs(seg_avg - target),
        shadow_error=shadow,
        period_slack=abs(closing.period - t),
        eps=params.eps,
        word=closing.word,
    )
