"""Two-sided topological Markov shifts over a truncated countable alphabet.

Symbols are the integers ``0 .. A-1`` (the first ``A`` values of the
alphabet enumeration); adjacency is a boolean matrix.  All operations act on
the largest strongly connected component of the truncated transition graph.

Points are eventually periodic in both directions, which keeps equality
decidable and is preserved by shifting, bracketing and closing.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .core import DynamicsError, OrbitSegment, PeriodicOrbit

Word = tuple


# ---------------------------------------------------------------------------
# systems


class MarkovSystem:
    """Markov shift defined by an adjacency predicate on ``range(size)``.

    Parameters
    ----------
    adjacency : callable or array_like
        Either ``allowed(i, j) -> bool`` or a square boolean matrix.
    size : int
        Truncation ``A``: number of materialized symbols.
    name : str
        Free-form label used in reports.
    """

    discrete = True

    def __init__(self, adjacency, size: int | None = None, name: str = "markov"):
        if callable(adjacency):
            if size is None or size < 1:
                raise DynamicsError("a truncation size is required")
            full = np.array(
                [[bool(adjacency(i, j)) for j in range(size)] for i in range(size)]
            )
        else:
            full = np.asarray(adjacency, dtype=bool)
            if full.ndim != 2 or full.shape[0] != full.shape[1]:
                raise DynamicsError("adjacency matrix must be square")
            if size is not None:
                full = full[:size, :size]
        self.name = name
        self.full_adjacency = full
        self.size = full.shape[0]
        ncomp, labels = connected_components(full, directed=True, connection="strong")
        best = max(
            range(ncomp),
            key=lambda c: (self._component_quality(full, labels, c), -c),
        )
        comp = np.flatnonzero(labels == best)
        if len(comp) == 1 and not full[comp[0], comp[0]]:
            raise DynamicsError("transition graph has no cycle")
        self.symbols: tuple[int, ...] = tuple(int(s) for s in comp)
        self._active = np.zeros(self.size, dtype=bool)
        self._active[comp] = True
        self.adjacency = full & self._active[:, None] & self._active[None, :]
        self._succ = [tuple(int(j) for j in np.flatnonzero(self.adjacency[i])) for i in range(self.size)]
        self._pred = [tuple(int(j) for j in np.flatnonzero(self.adjacency[:, i])) for i in range(self.size)]

    @staticmethod
    def _component_quality(full, labels, c):
        idx = np.flatnonzero(labels == c)
        has_cycle = len(idx) > 1 or full[idx[0], idx[0]]
        return (bool(has_cycle), len(idx))

    def __repr__(self):
        return f"MarkovSystem({self.name!r}, A={self.size}, component={len(self.symbols)})"

    # -- presets ---------------------------------------------------------

    @classmethod
    def full_shift(cls, k: int) -> "MarkovSystem":
        return cls(np.ones((k, k), dtype=bool), name=f"full({k})")

    @classmethod
    def golden_mean(cls) -> "MarkovSystem":
        return cls(np.array([[1, 1], [1, 0]], dtype=bool), name="golden-mean")

    @classmethod
    def renewal(cls, size: int) -> "MarkovSystem":
        """Renewal shift: ``0 -> n`` for every n, and ``n -> n-1`` for n >= 1."""
        return cls(lambda i, j: i == 0 or j == i - 1, size, name=f"renewal({size})")

    @classmethod
    def from_pairs(cls, size: int, pairs: Sequence[tuple[int, int]], name="pairs"):
        adj = np.zeros((size, size), dtype=bool)
        for i, j in pairs:
            if not (0 <= i < size and 0 <= j < size):
                raise DynamicsError(f"pair ({i}, {j}) outside alphabet of size {size}")
            adj[i, j] = True
        return cls(adj, name=name)

    # -- contract --------------------------------------------------------

    def allowed(self, a: int, b: int) -> bool:
        return bool(self.adjacency[a, b])

    def is_active(self, a: int) -> bool:
        return 0 <= a < self.size and bool(self._active[a])

    def successors(self, a: int) -> tuple[int, ...]:
        return self._succ[a]

    def evolve(self, x: "SymbolicPoint", t: int) -> "SymbolicPoint":
        return x.shift(int(t))

    def distance(self, x: "SymbolicPoint", y: "SymbolicPoint") -> float:
        return shift_distance(x, y)

    def word_admissible(self, word: Sequence[int], cyclic: bool = False) -> bool:
        if not word or not all(self.is_active(s) for s in word):
            return False
        pairs = zip(word, word[1:])
        if not all(self.allowed(a, b) for a, b in pairs):
            return False
        return not cyclic or self.allowed(word[-1], word[0])

    def periodic_point(self, word: Sequence[int]) -> "SymbolicPoint":
        word = tuple(int(s) for s in word)
        if not self.word_admissible(word, cyclic=True):
            raise DynamicsError(f"word {word} is not cyclically admissible")
        return SymbolicPoint(word, word, word, 0)

    def periodic_orbit(self, word: Sequence[int]) -> PeriodicOrbit:
        word = tuple(int(s) for s in word)
        x = self.periodic_point(word)
        return PeriodicOrbit(self, x, primitive_period(word), label=word_label(word))

    def check_point(self, x: "SymbolicPoint") -> None:
        """Raise unless every adjacent pair of ``x`` is allowed."""
        seq = x.left + x.center + x.right
        if not self.word_admissible(seq):
            raise DynamicsError("point contains a forbidden transition")
        if not (self.allowed(x.left[-1], x.left[0]) and self.allowed(x.right[-1], x.right[0])):
            raise DynamicsError("point tail is not cyclically admissible")


def word_label(word: Sequence[int]) -> str:
    if all(0 <= s < 10 for s in word):
        return "".join(str(s) for s in word)
    return ".".join(str(s) for s in word)


def primitive_period(word: Sequence[int]) -> int:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and tuple(word[d:]) + tuple(word[:d]) == tuple(word):
            return d
    return n


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True, eq=False)
class SymbolicPoint:
    """Eventually periodic bi-infinite sequence.

    ``center`` occupies indices ``start .. start+len(center)-1``; ``right``
    repeats from the end of the center to ``+inf``; ``left`` is the block
    immediately before ``start`` and repeats to ``-inf``.
    """

    left: Word
    center: Word
    right: Word
    start: int = 0

    def __post_init__(self):
        if not self.left or not self.right:
            raise DynamicsError("tails must be nonempty words")
        for name in ("left", "center", "right"):
            object.__setattr__(self, name, tuple(int(s) for s in getattr(self, name)))

    @property
    def stop(self) -> int:
        return self.start + len(self.center)

    def __getitem__(self, n: int) -> int:
        k = n - self.start
        if 0 <= k < len(self.center):
            return self.center[k]
        if k >= len(self.center):
            return self.right[(k - len(self.center)) % len(self.right)]
        return self.left[k % len(self.left)]

    def window(self, lo: int, hi: int) -> tuple[int, ...]:
        """Coordinates ``x_lo .. x_{hi-1}``."""
        if hi <= lo:
            return ()
        a, b = self.start, self.stop
        parts = []
        if lo < a:
            parts.append(tuple(self[n] for n in range(lo, min(hi, a))))
        if hi > a and lo < b:
            parts.append(self.center[max(lo, a) - a : min(hi, b) - a])
        if hi > b:
            first = max(lo, b)
            k = (first - b) % len(self.right)
            reps = (hi - first + k) // len(self.right) + 1
            parts.append((self.right * reps)[k : k + hi - first])
        return sum(parts, ())

    def shift(self, k: int = 1) -> "SymbolicPoint":
        return SymbolicPoint(self.left, self.center, self.right, self.start - k)

    def left_block(self, p: int) -> Word:
        """Period block of the left tail ending just before index ``p <= start``."""
        return self.window(p - len(self.left), p)

    def right_block(self, q: int) -> Word:
        """Period block of the right tail beginning at index ``q >= stop``."""
        return self.window(q, q + len(self.right))

    def __eq__(self, other):
        if not isinstance(other, SymbolicPoint):
            return NotImplemented
        return first_disagreement(self, other) is None

    __hash__ = None

    def __repr__(self):
        lo, hi = min(self.start, -3), max(self.stop, 4)
        left = "".join(map(str, self.window(lo, 0)))
        right = "".join(map(str, self.window(0, hi)))
        return f"SymbolicPoint(({word_label(self.left)})^∞{left}.{right}({word_label(self.right)})^∞)"


def first_disagreement(x: SymbolicPoint, y: SymbolicPoint) -> int | None:
    """Smallest ``|n|`` with ``x_n != y_n``, or None when ``x == y``."""
    pos = max(x.stop, y.stop, 0) + math.lcm(len(x.right), len(y.right))
    neg = max(-x.start, -y.start, 0) + math.lcm(len(x.left), len(y.left))
    for k in range(max(pos, neg) + 1):
        if k <= pos and x[k] != y[k]:
            return k
        if k <= neg and x[-k] != y[-k]:
            return k
    return None


def shift_distance(x: SymbolicPoint, y: SymbolicPoint) -> float:
    """``2**-k`` where ``k`` is the smallest ``|n|`` with ``x_n != y_n``."""
    k = first_disagreement(x, y)
    return 0.0 if k is None else 2.0 ** (-k)


# ---------------------------------------------------------------------------
# local product structure and closing


def bracket(x: SymbolicPoint, y: SymbolicPoint) -> SymbolicPoint:
    """Point following ``x`` in the past and ``y`` in the future.

    Returns ``z`` with ``z_n = x_n`` for ``n <= 0`` and ``z_n = y_n`` for
    ``n > 0``.  Requires ``x_0 == y_0`` so that ``z`` is admissible.
    """
    if x[0] != y[0]:
        raise DynamicsError("points not in product neighborhood")
    p = min(x.start, 1)
    q = max(y.stop, 1)
    center = x.window(p, 1) + y.window(1, q)
    return SymbolicPoint(x.left_block(p), center, y.right_block(q), p)


@dataclass(frozen=True, eq=False)
class ClosingResult:
    """Outcome of :func:`close_segment`.

    ``period`` is the closing period ``l`` (equal to the requested return
    time); ``orbit.period`` is the primitive period of the same orbit.
    ``radii[s]`` is the certified agreement radius at time ``s``: the orbit
    and the segment agree on ``|n| < radii[s]`` after ``s`` shifts, so
    their distance is at most ``2**-radii[s]``.
    """

    orbit: PeriodicOrbit
    word: Word
    period: int
    radii: tuple[int, ...]

    @property
    def bounds(self) -> tuple[float, ...]:
        return tuple(2.0 ** (-r) for r in self.radii)


def close_segment(system: MarkovSystem, x: SymbolicPoint, t: int, m: int) -> ClosingResult:
    """Close the segment ``x_0 .. x_{t-1}`` into a periodic orbit.

    The hypothesis is ``x_i == x_{i+t}`` for ``|i| <= m``, which is the
    symbolic form of ``d(x, shift^t x) <= 2**-m``.
    """
    if t < 1 or m < 0:
        raise DynamicsError("need t >= 1 and m >= 0")
    for k in range(m + 1):
        for i in ((k,) if k == 0 else (k, -k)):
            if x[i] != x[i + t]:
                raise DynamicsError(f"return condition fails at index {i}")
    word = x.window(0, t)
    if not system.word_admissible(word):
        raise DynamicsError("segment contains a forbidden transition")
    if not system.allowed(word[-1], word[0]):
        raise DynamicsError(f"cyclic junction {word[-1]}->{word[0]} is forbidden")
    # x agrees with the periodic point on the index range [-m, t + m]
    radii = tuple(min(s + m, t + m - s) + 1 for s in range(t + 1))
    return ClosingResult(system.periodic_orbit(word), word, t, radii)


# ---------------------------------------------------------------------------
# transitivity oracle and periodic orbits


def _distances_to(system: MarkovSystem, target: int) -> dict[int, int]:
    dist = {target: 0}
    queue = deque([target])
    while queue:
        v = queue.popleft()
        for u in system._pred[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def connect_words(system: MarkovSystem, a: int, b: int) -> Word:
    """Shortest word ``w`` with ``a w b`` admissible.

    Among shortest connectors the lexicographically smallest one (by symbol
    index) is returned.
    """
    if not (system.is_active(a) and system.is_active(b)):
        raise DynamicsError(f"symbols {a}, {b} are not in the active component")
    if system.allowed(a, b):
        return ()
    dist = _distances_to(system, b)
    options = [s for s in system.successors(a) if s in dist]
    if not options:
        raise DynamicsError(f"symbols {a} and {b} are not connected")
    cur = min(options, key=lambda s: (dist[s], s))
    word = [cur]
    while not system.allowed(cur, b):
        cur = min(s for s in system.successors(cur) if dist.get(s) == dist[cur] - 1)
        word.append(cur)
    return tuple(word)


def is_lyndon(word: Sequence[int]) -> bool:
    w = tuple(word)
    return all(w < w[k:] + w[:k] for k in range(1, len(w)))


def enumerate_periodic(system: MarkovSystem, T: int) -> list[PeriodicOrbit]:
    """Primitive periodic orbits of period ``<= T``, one per rotation class.

    Each orbit is represented by its least rotation (a Lyndon word); the
    list is sorted lexicographically by that word.
    """
    if T < 1:
        raise DynamicsError("T must be >= 1")
    found: list[Word] = []

    def extend(path: list[int]):
        if system.allowed(path[-1], path[0]) and is_lyndon(path):
            found.append(tuple(path))
        if len(path) == T:
            return
        for s in system.successors(path[-1]):
            if s >= path[0]:
                path.append(s)
                extend(path)
                path.pop()

    for a in system.symbols:
        extend([a])
    found.sort()
    return [system.periodic_orbit(w) for w in found]


# ---------------------------------------------------------------------------
# Markov measures


@dataclass(frozen=True, eq=False)
class MarkovMeasure:
    """Stationary Markov chain: transition matrix ``P`` and row vector ``pi``."""

    system: MarkovSystem
    P: np.ndarray
    pi: np.ndarray

    def cylinder_weight(self, lo: int, word: Sequence[int]) -> float:
        """Mass of ``{x : x_lo .. x_{lo+len-1} = word}`` (independent of ``lo``)."""
        w = self.pi[word[0]]
        for a, b in zip(word, word[1:]):
            w *= self.P[a, b]
        return float(w)


def _check_stochastic(P: np.ndarray, tol: float = 1e-12) -> None:
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise DynamicsError("transition matrix must be square")
    if (P < 0).any():
        raise DynamicsError("transition matrix has negative entries")
    sums = P.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if len(bad):
        raise DynamicsError(f"row {bad[0]} sums to {sums[bad[0]]:.15g}, not 1")


def stationary_vector(P) -> np.ndarray:
    """Stationary distribution of an irreducible row-stochastic matrix."""
    P = np.asarray(P, dtype=float)
    _check_stochastic(P)
    ncomp, _ = connected_components(P > 0, directed=True, connection="strong")
    if ncomp != 1:
        raise DynamicsError("transition matrix is reducible")
    n = P.shape[0]
    A = np.vstack([P.T - np.eye(n), np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi = np.linalg.lstsq(A, rhs, rcond=None)[0]
    for _ in range(3):
        pi = pi @ P
        pi /= pi.sum()
    return pi


def stationary_measure(system: MarkovSystem, P) -> MarkovMeasure:
    """Markov measure of ``P`` on the active component of ``system``.

    ``P`` is indexed by the component's symbols in increasing order; the
    stored matrix is embedded into the full ``A x A`` alphabet.
    """
    P = np.asarray(P, dtype=float)
    sym = list(system.symbols)
    if P.shape != (len(sym), len(sym)):
        raise DynamicsError(f"expected a {len(sym)}x{len(sym)} matrix")
    pi = stationary_vector(P)
    sub = system.adjacency[np.ix_(sym, sym)]
    if (P[~sub] > 0).any():
        raise DynamicsError("transition matrix charges a forbidden transition")
    bigP = np.zeros((system.size, system.size))
    bigP[np.ix_(sym, sym)] = P
    bigpi = np.zeros(system.size)
    bigpi[sym] = pi
    return MarkovMeasure(system, bigP, bigpi)


def uniform_measure(system: MarkovSystem) -> MarkovMeasure:
    """Chain moving to a uniformly chosen allowed successor.

    On the full ``k``-shift this is the Bernoulli(1/k, ..., 1/k) measure.
    """
    sym = list(system.symbols)
    sub = system.adjacency[np.ix_(sym, sym)].astype(float)
    return stationary_measure(system, sub / sub.sum(axis=1, keepdims=True))


def bernoulli_measure(system: MarkovSystem, probs: Sequence[float]) -> MarkovMeasure:
    """i.i.d. measure; requires the full shift on the listed symbols."""
    probs = np.asarray(probs, dtype=float)
    return stationary_measure(system, np.tile(probs, (len(probs), 1)))


def _cycle_through(system: MarkovSystem, s: int) -> Word:
    """Shortest cyclic word starting with ``s``."""
    return (s,) + connect_words(system, s, s)


def point_from_path(system: MarkovSystem, path: Sequence[int]) -> SymbolicPoint:
    """Embed a finite admissible path as ``x_0 .. x_{n-1}`` of a point.

    The tails are the shortest cycles through the first and last symbol,
    so the result stays admissible.
    """
    path = tuple(int(s) for s in path)
    if not system.word_admissible(path):
        raise DynamicsError("path contains a forbidden transition")
    head = _cycle_through(system, path[0])
    tail = _cycle_through(system, path[-1])
    return SymbolicPoint(head, path, tail[1:] + tail[:1], 0)


def sample_path(mu: MarkovMeasure, length: int, seed: int) -> OrbitSegment:
    """Stationary path of ``length`` steps, reproducible from ``seed``."""
    if length < 1:
        raise DynamicsError("length must be positive")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(np.vstack([mu.pi, mu.P]), axis=1)
    total = cdf[:, -1:]
    cdf = np.divide(cdf, total, out=np.zeros_like(cdf), where=total > 0)
    u = rng.random(length)
    first = int(np.searchsorted(cdf[0], u[0], side="right"))
    # candidate successor of every state at every step, then one cheap walk
    nxt = [
        np.searchsorted(cdf[s + 1], u, side="right").tolist() if s in mu.system.symbols else None
        for s in range(mu.system.size)
    ]
    path = [first]
    for n in range(1, length):
        path.append(nxt[path[-1]][n])
    x = point_from_path(mu.system, path)
    return OrbitSegment(mu.system, x, length)


def random_returning_point(system: MarkovSystem, period: int, m: int, seed: int,
                           tail: int = 8) -> tuple[SymbolicPoint, int]:
    """Point whose segment of length ``t`` returns with window ``m``.

    A random admissible cyclic word ``w`` of length close to ``period`` (a
    random path closed up by :func:`connect_words`) fills ``x_{-m} .. x_{t+m}``
    periodically; random admissible tails of length ``tail`` surround it, so
    agreement typically stops right at the window.  Returns ``(x, t)``.
    """
    rng = np.random.default_rng(seed)
    s = int(rng.choice(system.symbols))
    walk = [s]
    for _ in range(max(period, 1) - 1):
        walk.append(int(rng.choice(system.successors(walk[-1]))))
    word = tuple(walk) + connect_words(system, walk[-1], walk[0])
    t = len(word)
    core = [word[n % t] for n in range(-m, t + m + 1)]
    back = [core[0]]
    for _ in range(tail):
        back.append(int(rng.choice(system._pred[back[-1]])))
    fwd = [core[-1]]
    for _ in range(tail):
        fwd.append(int(rng.choice(system.successors(fwd[-1]))))
    path = back[:0:-1] + core + fwd[1:]
    return point_from_path(system, path).shift(tail + m), t
