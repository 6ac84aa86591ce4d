"""Approximating a convex combination of periodic measures by one periodic orbit.

The targets ``x_1, ..., x_k`` with rational weights ``p_i / q`` are traversed
in order: ``r_i`` turns around orbit ``i`` followed by a connector reaching
orbit ``i + 1`` (cyclically).  The repetition counts follow the lcm rule
``r_i = N p_i lcm(l) / l_i`` so that the time spent on orbit ``i`` is exactly
proportional to ``p_i``.  The concatenated itinerary is then closed into a
single periodic orbit, and a certificate compares its measure with the
target combination on a declared test family.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import markov, schottky
from .core import DynamicsError, OrbitSegment, PeriodicOrbit
from .measures import (
    Empirical,
    Mixture,
    PeriodicCombination,
    TestFamily,
    bl_distance,
    family_gaps,
    integrate,
    orbit_measure,
    separates,
)


@dataclass(frozen=True, eq=False)
class GluingItinerary:
    """Resolved gluing plan.

    ``blocks[i]`` is the period word of target ``i`` (symbols for shifts,
    generator letters for Schottky systems) and ``connectors[i]`` joins the
    end of block ``i`` to the start of block ``i + 1``, cyclically.
    """

    system: object
    targets: tuple
    weights: tuple
    N: int
    blocks: tuple
    repetitions: tuple
    connectors: tuple
    lcm: int
    eps: float = 1.0

    @property
    def geometric(self) -> bool:
        return not self.system.discrete

    @property
    def word(self) -> tuple:
        out: list = []
        for block, r, conn in zip(self.blocks, self.repetitions, self.connectors):
            out.extend(block * r)
            out.extend(conn)
        return tuple(out)

    @property
    def connector_times(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.connectors)

    @property
    def block_times(self) -> tuple:
        return tuple(r * t.period for r, t in zip(self.repetitions, self.targets))

    @property
    def segments(self) -> int:
        """Number of maximal pieces (block runs and nonempty connectors) in the cycle."""
        return len(self.blocks) + sum(1 for c in self.connectors if c)

    @property
    def target_measure(self) -> PeriodicCombination:
        return PeriodicCombination(self.targets, self.weights)

    @property
    def epsilon_schedule(self) -> tuple[float, ...]:
        return tuple(self.eps / 2 ** (k + 1) for k in range(len(self.blocks)))

    def describe(self) -> dict:
        sep = "" if self.geometric else "."
        fmt = (lambda w: "".join(w)) if self.geometric else markov.word_label
        return {
            "targets": [fmt(b) if b else sep for b in self.blocks],
            "weights": [f"{w.numerator}/{w.denominator}" for w in self.weights],
            "N": self.N,
            "lcm": self.lcm,
            "repetitions": list(self.repetitions),
            "connectors": [fmt(c) for c in self.connectors],
        }


def _period_word(orbit: PeriodicOrbit) -> tuple:
    if orbit.system.discrete:
        return orbit.base.window(0, int(orbit.period))
    geo = orbit.base.closed
    if geo is None:
        raise DynamicsError("geometric targets must be closed-geodesic orbits")
    return geo.word


def _letter_connector(system: schottky.SchottkySystem, last: str, first: str) -> tuple:
    inv = schottky.inverse_letter
    if last != inv(first):
        return ()
    for x in system.letters:
        if x != inv(last) and x != inv(first):
            return (x,)
    raise DynamicsError(f"no letter joins {last} to {first}")


def plan_itinerary(system, targets: Sequence[tuple[PeriodicOrbit, object]], N: int,
                   eps: float = 1.0) -> GluingItinerary:
    """Resolve repetition counts and connectors for ``targets``.

    ``targets`` is a list of ``(orbit, weight)`` pairs with rational weights
    summing to one; zero-weight targets are dropped.
    """
    if N < 1:
        raise DynamicsError("N must be a positive integer")
    pairs = [(o, Fraction(w)) for o, w in targets]
    if not pairs:
        raise DynamicsError("no targets")
    if any(w < 0 for _, w in pairs):
        raise DynamicsError("weights must be nonnegative")
    total = sum(w for _, w in pairs)
    if total != 1:
        raise DynamicsError(f"weights sum to {total}, not 1")
    pairs = [(o, w) for o, w in pairs if w > 0]
    if any(o.system is not system for o, _ in pairs):
        raise DynamicsError("targets belong to a different system")
    orbits = tuple(o for o, _ in pairs)
    weights = tuple(w for _, w in pairs)
    q = math.lcm(*(w.denominator for w in weights))
    numer = [int(w * q) for w in weights]
    blocks = tuple(_period_word(o) for o in orbits)
    # for Schottky targets word length plays the role of the period
    periods = [len(b) for b in blocks]
    L = math.lcm(*periods)
    reps = tuple(N * p * L // ell for p, ell in zip(numer, periods))
    conns = []
    for i, block in enumerate(blocks):
        nxt = blocks[(i + 1) % len(blocks)]
        if system.discrete:
            conns.append(markov.connect_words(system, block[-1], nxt[0]))
        else:
            conns.append(_letter_connector(system, block[-1], nxt[0]))
    return GluingItinerary(system, orbits, weights, N, blocks, reps, tuple(conns), L, eps)


# ---------------------------------------------------------------------------
# execution


def _glue_symbolic(plan: GluingItinerary) -> PeriodicOrbit:
    """Recursive bracket gluing followed by closing, on a Markov shift."""
    system = plan.system
    z = system.periodic_point(plan.blocks[0])
    T = plan.repetitions[0] * len(plan.blocks[0])
    n = len(plan.blocks)
    for i in range(n):
        nxt = plan.blocks[(i + 1) % n]
        future = plan.connectors[i] + (nxt if i + 1 < n else plan.blocks[0])
        head = z[T - 1]
        if not system.allowed(head, future[0]):
            raise DynamicsError(f"inadmissible junction after block {i}: {head}->{future[0]}")
        tail = future[len(plan.connectors[i]):]
        y = markov.SymbolicPoint(
            markov._cycle_through(system, head), (head,) + plan.connectors[i], tail, 0
        )
        z = markov.bracket(z.shift(T - 1), y).shift(-(T - 1))
        T += len(plan.connectors[i])
        if i + 1 < n:
            T += plan.repetitions[i + 1] * len(nxt)
    # close around the middle of the first run, where the return is symmetric
    run = plan.repetitions[0] * len(plan.blocks[0])
    h = (plan.repetitions[0] // 2) * len(plan.blocks[0])
    m = min(h, run - h - 1)
    closing = markov.close_segment(system, z.shift(h), T, m)
    word = plan.word
    if closing.word != word[h:] + word[:h]:
        raise DynamicsError("glued word disagrees with the itinerary")
    return system.periodic_orbit(word)


def _glue_geometric(plan: GluingItinerary) -> PeriodicOrbit:
    system = plan.system
    word = plan.word
    n = len(word)
    for k in range(n):
        if word[k] == schottky.inverse_letter(word[(k + 1) % n]):
            raise DynamicsError(f"non-axial product: cancellation at junction {k}")
    geo = schottky.closed_geodesic_from_word(system, word)
    if len(geo.word) != n:
        raise DynamicsError("glued word is not cyclically reduced")
    return geo.orbit(system)


def execute_gluing(plan: GluingItinerary) -> PeriodicOrbit:
    """Single periodic orbit following the itinerary."""
    if plan.geometric:
        return _glue_geometric(plan)
    return _glue_symbolic(plan)


def expected_measure(plan: GluingItinerary):
    """Time-weighted prediction of the glued orbit's measure.

    Orbit ``i`` gets weight ``r_i l_i / P`` and connector ``j`` (as the
    empirical measure of its stretch of the glued orbit) weight ``t_j / P``,
    where ``P`` is the total period.  For Schottky plans connector stretches
    have no intrinsic duration, so only the target part is returned.
    """
    if plan.geometric:
        return plan.target_measure
    P = len(plan.word)
    comps, weights = [], []
    for orbit, r in zip(plan.targets, plan.repetitions):
        comps.append(orbit_measure(orbit))
        weights.append(Fraction(r * int(orbit.period), P))
    glued = plan.system.periodic_point(plan.word)
    pos = 0
    for block, r, conn in zip(plan.blocks, plan.repetitions, plan.connectors):
        pos += r * len(block)
        if conn:
            seg = OrbitSegment(plan.system, glued.shift(pos), len(conn))
            comps.append(Empirical(seg))
            weights.append(Fraction(len(conn), P))
        pos += len(conn)
    if len(comps) == 1:
        return comps[0]
    return Mixture(tuple(comps), tuple(weights))


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class Certificate:
    """Audited comparison of the glued orbit with the target combination.

    ``measured`` is the largest raw gap ``|int f d(glued) - int f d(target)|``
    over the family; ``bl`` is the normalized finite-family distance.
    ``bound`` is the worst-case gap implied by the plan's bookkeeping.
    """

    measured: float
    bl: float
    bound: float
    total_period: float
    connector_fraction: float
    separating: bool
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.measured <= self.bound

    def as_record(self) -> dict:
        return {
            "measured": _num(self.measured),
            "bl_distance": _num(self.bl),
            "bound": _num(self.bound),
            "total_period": _num(self.total_period),
            "connector_fraction": _num(self.connector_fraction),
            "separating": self.separating,
            "passed": self.passed,
            **self.details,
        }


def _num(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return float(x)


def certify(result: PeriodicOrbit, plan: GluingItinerary, family: TestFamily) -> Certificate:
    """Measure the glued orbit against the targets and check the bound."""
    target = plan.target_measure
    glued = orbit_measure(result)
    gaps = family_gaps(glued, target, family)
    measured = max(gaps)
    bl = bl_distance(glued, target, family)
    sep = len(plan.targets) < 2 or separates(family, plan.targets)
    if plan.geometric:
        bound, total, conn_time, details = _geometric_bound(result, plan, family)
    else:
        if any(not f.is_cylinder for f in family):
            raise DynamicsError("symbolic certificates need cylinder test functions")
        total = len(plan.word)
        conn_time = sum(plan.connector_times)
        junctions = plan.segments if plan.segments > 1 else 0
        span = family.max_length - 1
        bound = Fraction(2 * int(family.max_sup) * (conn_time + junctions * span), total) \
            if float(family.max_sup).is_integer() else \
            2 * family.max_sup * (conn_time + junctions * span) / total
        details = {"junctions": junctions, "window_span": span}
    frac = Fraction(conn_time, total) if isinstance(total, int) else conn_time / total
    return Certificate(measured, bl, bound, total, frac, sep, details)


def _geometric_bound(result: PeriodicOrbit, plan: GluingItinerary, family: TestFamily):
    """Lipschitz bound from piecewise shadowing of the glued closed geodesic.

    Each fundamental-domain piece of the glued geodesic that sits strictly
    inside a run of block ``i`` is matched with the corresponding piece of
    orbit ``i``; the sampled distance between matched pieces, the duration
    mismatch and the unmatched time enter the bound.
    """
    system = plan.system
    K = max(f.lipschitz for f in family)
    F = max(f.sup for f in family)
    glued = result.base.closed
    word = plan.word
    n = len(word)
    owner = []  # (block index, offset within block) or None for connector letters
    for i, (block, r, conn) in enumerate(zip(plan.blocks, plan.repetitions, plan.connectors)):
        owner.extend((i, j % len(block)) for j in range(r * len(block)))
        owner.extend([None] * len(conn))
    block_geos = [t.base.closed for t in plan.targets]
    probe = np.linspace(0.0, 1.0, 9)
    matched_err = 0.0
    unmatched = 0.0
    shadow = [0.0] * len(plan.blocks)
    used = [0] * len(plan.blocks)
    for k in range(n):
        here, prev = owner[k], owner[k - 1]
        xm, xp, enter, leave = glued.pieces[k]
        tau = leave - enter
        # piece k lies between letters k-1 and k; both must belong to the same run
        if here is None or prev is None or here[0] != prev[0] or \
                (prev[1] + 1) % len(plan.blocks[here[0]]) != here[1]:
            unmatched += F * tau
            continue
        i, j = here
        bxm, bxp, benter, bleave = block_geos[i].pieces[j]
        btau = bleave - benter
        d = max(
            schottky.cover_distance(
                schottky.UnitTangentVector(xm, xp, enter + u * tau, system.basepoint),
                schottky.UnitTangentVector(bxm, bxp, benter + u * btau, system.basepoint),
            )
            for u in probe
        )
        shadow[i] = max(shadow[i], d)
        used[i] += 1
        matched_err += btau * K * d + F * abs(tau - btau)
    # target pieces never matched (the first piece of each run)
    for i, geo in enumerate(block_geos):
        total_pieces = plan.repetitions[i] * len(plan.blocks[i])
        durations = [p[3] - p[2] for p in geo.pieces]
        missing = total_pieces - used[i]
        unmatched += F * missing * max(durations)
    S = sum(r * t.period for r, t in zip(plan.repetitions, plan.targets))
    ell = result.period
    bound = (matched_err + unmatched + F * abs(S - ell)) / ell + 1e-9
    details = {
        "block_time": S,
        "excess_time": ell - S,
        "shadow_max": shadow,
        "epsilon_schedule": list(plan.epsilon_schedule),
        "word_length": n,
        "coding_agrees": _coding_agrees(system, result, word),
    }
    return bound, ell, abs(ell - S), details


def _coding_agrees(system, result: PeriodicOrbit, word: tuple, depth: int = 12) -> bool:
    """Ping-pong coding of the attracting endpoint reproduces ``word`` periodically."""
    expect = tuple((word * (depth // len(word) + 1))[:depth])
    return schottky.forward_coding(system, result.base.closed.attracting, depth) == expect
