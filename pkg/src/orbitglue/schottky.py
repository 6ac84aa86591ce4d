"""Geodesic flow of a Schottky surface in Hopf coordinates.

The upper half-plane model is used throughout.  A Schottky group is given by
generator matrices in SL(2, R) together with ping-pong half-disks: each
letter ``x`` (a generator or an inverse, inverses written in upper case) has
a half-disk ``D_x`` centred on the real axis, and ``x`` maps the exterior of
``D_X`` onto the interior of ``D_x`` (``X`` the inverse letter).  The
exterior ``F`` of all half-disks is a fundamental domain.

A unit tangent vector is a Hopf triple ``(xi_minus, xi_plus, s)``: the
backward and forward endpoints on the boundary ``R u {inf}`` and the signed
time from the point of the geodesic closest to the basepoint.  The flow adds
to ``s`` and the product structure is read off coordinates, so no ODE is
ever integrated.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import ClosingParams, DynamicsError, OrbitSegment, PeriodicOrbit

INF = math.inf


# ---------------------------------------------------------------------------
# words and group elements


def inverse_letter(x: str) -> str:
    return x.lower() if x.isupper() else x.upper()


def reduce_word(word: Iterable[str]) -> tuple[str, ...]:
    out: list[str] = []
    for x in word:
        if out and out[-1] == inverse_letter(x):
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduce(word: Iterable[str]) -> tuple[str, ...]:
    w = list(reduce_word(word))
    while len(w) > 1 and w[0] == inverse_letter(w[-1]):
        w = w[1:-1]
    return tuple(w)


def inverse_word(word: Sequence[str]) -> tuple[str, ...]:
    return tuple(inverse_letter(x) for x in reversed(word))


def parse_word(text: str) -> tuple[str, ...]:
    """``"abAB"`` or ``"a^3 b"``-free plain letter strings; ``"1"`` is empty."""
    text = text.strip()
    if text in ("", "1", "e"):
        return ()
    if not text.isalpha():
        raise DynamicsError(f"cannot parse group word {text!r}")
    return tuple(text)


def canonical_rotation(word: Sequence[str]) -> tuple[str, ...]:
    """Least cyclic rotation; identifies conjugacy classes of cyclically reduced words."""
    w = tuple(word)
    return min(w[k:] + w[:k] for k in range(len(w))) if w else w


@dataclass(frozen=True, eq=False)
class GroupElement:
    """Matrix in SL(2, R) tagged with its reduced word."""

    matrix: np.ndarray
    word: tuple = ()

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (2, 2):
            raise DynamicsError("group elements are 2x2 matrices")
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        # products of unimodular matrices are unimodular; for long words the
        # computed det is only accurate to ~ eps * |m|^2, so leave those alone
        if abs(det - 1.0) > 1e-9 * max(1.0, float(np.max(np.abs(m))) ** 2):
            if det <= 0:
                raise DynamicsError("matrix must have positive determinant")
            m = m / math.sqrt(det)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "word", reduce_word(self.word))

    @property
    def trace(self) -> float:
        return float(self.matrix[0, 0] + self.matrix[1, 1])

    @property
    def is_axial(self) -> bool:
        return abs(self.trace) > 2

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.matrix @ other.matrix, self.word + other.word)

    def inverse(self) -> "GroupElement":
        (a, b), (c, d) = self.matrix
        return GroupElement(np.array([[d, -b], [-c, a]]), inverse_word(self.word))

    def __call__(self, z):
        return mobius(self.matrix, z)

    def __repr__(self):
        return f"GroupElement({''.join(self.word) or '1'}, tr={self.trace:.6g})"


def identity() -> GroupElement:
    return GroupElement(np.eye(2), ())


# ---------------------------------------------------------------------------
# hyperbolic plane


def mobius(m, z):
    """Fractional-linear action on ``H u R u {inf}``."""
    (a, b), (c, d) = m
    if z == INF or (isinstance(z, complex) and cmath.isinf(z)):
        return INF if c == 0 else a / c
    den = c * z + d
    if den == 0:
        return INF
    return (a * z + b) / den


def apply_mobius(g: GroupElement, z):
    return mobius(g.matrix, z)


def hyperbolic_distance(z: complex, w: complex) -> float:
    return 2.0 * math.asinh(abs(z - w) / (2.0 * math.sqrt(z.imag * w.imag)))


def translation_length(g: GroupElement) -> float:
    """Translation length ``2 arccosh(|tr g| / 2)`` of an axial element."""
    tr = abs(g.trace)
    if tr <= 2:
        raise DynamicsError(f"not axial: |trace| = {tr:.12g} <= 2")
    return 2.0 * math.acosh(tr / 2.0)


def axis_endpoints(g: GroupElement) -> tuple[float, float]:
    """``(repelling, attracting)`` fixed points of an axial element."""
    if not g.is_axial:
        raise DynamicsError(f"not axial: |trace| = {abs(g.trace):.12g} <= 2")
    (a, b), (c, d) = g.matrix
    if abs(c) < 1e-300:
        finite = b / (d - a)
        # z -> (a/d) z + b/d attracts to inf iff |a| > |d|
        return (float(finite), INF) if abs(a) > abs(d) else (INF, float(finite))
    tr = a + d
    disc = math.sqrt(tr * tr - 4.0)
    # roots of c z^2 + (d - a) z - b = 0, in a cancellation-free form
    q = -0.5 * ((d - a) + math.copysign(disc, d - a if d != a else 1.0))
    roots = [q / c, -b / q] if q != 0 else [(a - d) / (2 * c)] * 2
    # g'(z) = (cz + d)^-2: the repelling point has the smaller |cz + d|
    mags = [abs(c * z + d) for z in roots]
    rep, att = (roots[0], roots[1]) if mags[0] < mags[1] else (roots[1], roots[0])
    return float(rep), float(att)


def _to_imaginary_axis(xm: float, xp: float) -> np.ndarray:
    """SL(2,R) matrix sending ``xm -> 0`` and ``xp -> inf``."""
    if xm == xp:
        raise DynamicsError("degenerate geodesic: endpoints coincide")
    if xp == INF:
        return np.array([[1.0, -xm], [0.0, 1.0]])
    if xm == INF:
        return np.array([[0.0, -1.0], [1.0, -xp]])
    if xm > xp:
        m = np.array([[1.0, -xm], [1.0, -xp]])
    else:
        m = np.array([[-1.0, xm], [1.0, -xp]])
    return m / math.sqrt(abs(xm - xp))


def _inv(m: np.ndarray) -> np.ndarray:
    (a, b), (c, d) = m
    return np.array([[d, -b], [-c, a]])


def busemann(xi: float, z: complex, base: complex) -> float:
    """Busemann function ``beta_xi(z, base)``; decreases at unit rate toward ``xi``."""
    if xi == INF:
        return math.log(base.imag) - math.log(z.imag)
    return math.log(abs(z - xi) ** 2 / z.imag) - math.log(abs(base - xi) ** 2 / base.imag)


def _angle_gap(a: float, b: float) -> float:
    return abs((a - b + math.pi) % (2 * math.pi) - math.pi)


@dataclass(frozen=True)
class UnitTangentVector:
    """Hopf triple ``(xi_minus, xi_plus, s)`` relative to a basepoint."""

    xi_minus: float
    xi_plus: float
    s: float = 0.0
    basepoint: complex = 1j
    closed: "ClosedGeodesic | None" = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.xi_minus == self.xi_plus:
            raise DynamicsError("degenerate vector: endpoints coincide")

    def flow(self, t: float) -> "UnitTangentVector":
        return UnitTangentVector(self.xi_minus, self.xi_plus, self.s + t, self.basepoint, self.closed)

    def frame(self) -> np.ndarray:
        """Matrix ``M`` with ``M(0) = xi_minus``, ``M(inf) = xi_plus``, ``M(i)`` the base point."""
        T = _to_imaginary_axis(self.xi_minus, self.xi_plus)
        u = math.log(abs(mobius(T, self.basepoint))) + self.s
        return _inv(T) @ np.diag([math.exp(u / 2), math.exp(-u / 2)])

    @classmethod
    def from_frame(cls, m: np.ndarray, basepoint: complex = 1j) -> "UnitTangentVector":
        xm, xp = mobius(m, 0.0), mobius(m, INF)
        xm = xm.real if isinstance(xm, complex) else xm
        xp = xp.real if isinstance(xp, complex) else xp
        T = _to_imaginary_axis(xm, xp)
        height = abs(mobius(T, mobius(m, 1j)))
        s = math.log(height) - math.log(abs(mobius(T, basepoint)))
        return cls(xm, xp, s, basepoint)

    @property
    def point(self) -> complex:
        return complex(mobius(self.frame(), 1j))

    @property
    def angle(self) -> float:
        """Euclidean direction angle of the vector at its base point."""
        (_, _), (c, d) = self.frame()
        return math.pi / 2 - 2 * cmath.phase(complex(d, c))

    def act(self, g: GroupElement) -> "UnitTangentVector":
        return UnitTangentVector.from_frame(g.matrix @ self.frame(), self.basepoint)


def cover_distance(v: UnitTangentVector, w: UnitTangentVector) -> float:
    """Product surrogate ``sqrt(d_H(p, q)^2 + angle^2)`` on the unit tangent bundle of H."""
    dh = hyperbolic_distance(v.point, w.point)
    return math.hypot(dh, _angle_gap(v.angle, w.angle))


def geodesic_crossing(xm: float, xp: float, center: float, radius: float, basepoint=1j):
    """Fiber time at which geodesic ``(xm, xp)`` crosses the semicircle ``|z-center| = radius``.

    Returns None when the two geodesics do not cross.
    """
    T = _to_imaginary_axis(xm, xp)
    e1, e2 = mobius(T, center - radius), mobius(T, center + radius)
    if e1 == INF or e2 == INF or e1 * e2 >= 0:
        return None
    height = math.sqrt(-e1 * e2)
    return math.log(height) - math.log(abs(mobius(T, basepoint)))


def hopf_bracket(v: UnitTangentVector, w: UnitTangentVector) -> tuple[UnitTangentVector, float]:
    """Vector on the strong unstable set of ``flow_t(v)`` and strong stable set of ``w``.

    The result has backward endpoint ``v.xi_minus``, forward endpoint
    ``w.xi_plus`` and lies on the horocycle at ``w.xi_plus`` through ``w``.
    The returned ``t`` is the time shift along ``v``.
    """
    if v.xi_minus == w.xi_plus:
        raise DynamicsError("degenerate bracket: no geodesic joins the endpoints")
    o = w.basepoint
    z0 = UnitTangentVector(v.xi_minus, w.xi_plus, 0.0, o)
    s = busemann(w.xi_plus, z0.point, o) - busemann(w.xi_plus, w.point, o)
    z = UnitTangentVector(v.xi_minus, w.xi_plus, s, o)
    t = busemann(v.xi_minus, z.point, o) - busemann(v.xi_minus, v.point, o)
    return z, t


# ---------------------------------------------------------------------------
# Schottky systems


@dataclass(frozen=True)
class Disk:
    """Half-disk ``{|z - center| < radius}`` in H, bounded by a geodesic."""

    center: float
    radius: float

    def contains(self, z) -> bool:
        if z == INF:
            return False
        return abs(z - self.center) < self.radius

    def distance_from(self, z: complex) -> float:
        """Hyperbolic distance from ``z`` to the bounding geodesic."""
        num = abs(abs(z - self.center) ** 2 - self.radius**2)
        return math.asinh(num / (2 * self.radius * z.imag))

    @property
    def interval(self) -> tuple[float, float]:
        return (self.center - self.radius, self.center + self.radius)


class SchottkySystem:
    """Geodesic flow on ``T^1(H / Gamma)`` for a Schottky group ``Gamma``.

    Parameters
    ----------
    generators : dict
        ``{letter: 2x2 matrix}`` for lower-case generator letters.
    disks : dict
        ``{letter: (center, radius)}`` for every letter and inverse letter.
    basepoint : complex
        Origin of fiber times.
    search_radius : int
        Default word-length bound used by :meth:`distance`.
    """

    discrete = False

    def __init__(self, generators, disks, basepoint: complex = 1j, search_radius: int = 3,
                 name: str = "schottky"):
        self.name = name
        self.basepoint = complex(basepoint)
        self.search_radius = search_radius
        self.generators = {x: GroupElement(m, (x,)) for x, m in generators.items()}
        for x in list(self.generators):
            if not (x.isalpha() and x.islower()):
                raise DynamicsError(f"generator names must be lower-case letters, got {x!r}")
            self.generators[x.upper()] = self.generators[x].inverse()
        self.letters = tuple(sorted(self.generators, key=lambda x: (x.lower(), x.isupper())))
        self.disks = {x: Disk(float(c), float(r)) for x, (c, r) in disks.items()}
        missing = set(self.letters) - set(self.disks)
        if missing:
            raise DynamicsError(f"no ping-pong disk for letters {sorted(missing)}")
        self.validate()

    def __repr__(self):
        return f"SchottkySystem({self.name!r}, rank={len(self.letters) // 2})"

    @classmethod
    def symmetric(cls, center: float = 2.0, radius: float = 1.0, scale: float = 0.25, **kw):
        """Two generators with disks ``(+-c, r)`` and ``(+-lc, lr)``.

        ``a`` maps the exterior of the disk at ``-c`` onto the disk at ``c``;
        ``b`` is ``a`` conjugated by the dilation ``z -> scale * z``.
        """
        c, r, lam = center, radius, scale
        if not (c > r > 0 and 0 < lam < (c - r) / (c + r)):
            raise DynamicsError("symmetric preset needs c > r > 0 and scale < (c-r)/(c+r)")
        a = np.array([[c / r, (c * c - r * r) / r], [1 / r, c / r]])
        b = np.array([[a[0, 0], lam * a[0, 1]], [a[1, 0] / lam, a[1, 1]]])
        disks = {"a": (c, r), "A": (-c, r), "b": (lam * c, lam * r), "B": (-lam * c, lam * r)}
        kw.setdefault("name", f"symmetric-schottky({c}, {r}, {scale})")
        return cls({"a": a, "b": b}, disks, **kw)

    def validate(self, samples: int = 64) -> None:
        """Check disjointness of the disks and the ping-pong mapping property."""
        items = list(self.disks.items())
        for (x, d1), (y, d2) in itertools.combinations(items, 2):
            if abs(d1.center - d2.center) <= d1.radius + d2.radius + 1e-12:
                raise DynamicsError(f"ping-pong disks {x} and {y} overlap")
        for x in self.letters:
            g, src, dst = self.generators[x], self.disks[inverse_letter(x)], self.disks[x]
            for k in range(samples):
                theta = math.pi * (k + 0.5) / samples
                for scale in (1.0 + 1e-9, 2.0, 50.0):
                    z = src.center + scale * src.radius * cmath.exp(1j * theta)
                    w = mobius(g.matrix, z)
                    if not abs(w - dst.center) <= dst.radius * (1 + 1e-9):
                        raise DynamicsError(f"generator {x} violates ping-pong")

    # -- group bookkeeping ----------------------------------------------

    def element(self, word: Sequence[str] | str) -> GroupElement:
        word = parse_word(word) if isinstance(word, str) else tuple(word)
        m = np.eye(2)
        for x in word:
            if x not in self.generators:
                raise DynamicsError(f"unknown letter {x!r}")
            m = m @ self.generators[x].matrix
        return GroupElement(m, word)

    def words(self, max_length: int) -> list[tuple[str, ...]]:
        """Reduced words by length, then letter order."""
        out = [()]
        layer = [()]
        for _ in range(max_length):
            layer = [w + (x,) for w in layer for x in self.letters
                     if not w or w[-1] != inverse_letter(x)]
            out.extend(layer)
        return out

    def elements(self, max_length: int) -> list[GroupElement]:
        out = [identity()]
        layer = [identity()]
        for _ in range(max_length):
            layer = [g @ self.generators[x] for g in layer for x in self.letters
                     if not g.word or g.word[-1] != inverse_letter(x)]
            out.extend(layer)
        return out

    def cyclic_words(self, max_length: int) -> list[tuple[str, ...]]:
        """Nonempty cyclically reduced words of length ``<= max_length``."""
        return [w for w in self.words(max_length)
                if w and w[0] != inverse_letter(w[-1])]

    # -- flow contract --------------------------------------------------

    def vector(self, xi_minus, xi_plus, s=0.0) -> UnitTangentVector:
        return UnitTangentVector(xi_minus, xi_plus, s, self.basepoint)

    def evolve(self, v: UnitTangentVector, t: float) -> UnitTangentVector:
        return v.flow(t)

    def distance(self, v, w) -> float:
        return quotient_distance(self, v, w, self.search_radius)

    def reduce(self, v: UnitTangentVector, max_steps: int = 10_000):
        """Translate ``v`` so that its base point lies in the fundamental domain."""
        m = v.frame()
        word: list[str] = []
        for _ in range(max_steps):
            z = mobius(m, 1j)
            hit = next((x for x in self.letters if self.disks[x].contains(z)), None)
            if hit is None:
                out = UnitTangentVector.from_frame(m, self.basepoint)
                return out, reduce_word(word)
            m = self.generators[inverse_letter(hit)].matrix @ m
            word.append(inverse_letter(hit))
        raise DynamicsError("reduction did not terminate")

    def in_domain(self, z: complex) -> bool:
        return not any(d.contains(z) for d in self.disks.values())

    def trajectory_arrays(self, v: UnitTangentVector, times) -> tuple[np.ndarray, np.ndarray]:
        """Base points and angles of domain representatives of ``flow_t(v)``."""
        if v.closed is not None:
            return v.closed.arrays(self, v.s + np.asarray(times, dtype=float))
        reps = [self.reduce(v.flow(t))[0] for t in times]
        return np.array([r.point for r in reps]), np.array([r.angle for r in reps])

    def sample(self, v: UnitTangentVector, times: Sequence[float]) -> list[UnitTangentVector]:
        """Vectors ``flow_t(v)``, exact on closed geodesics."""
        if v.closed is not None:
            return [v.closed.vector_at(self, v.s + t) for t in times]
        return [v.flow(t) for t in times]

    # -- closed geodesics -------------------------------------------------

    def closed_geodesic(self, word) -> "ClosedGeodesic":
        return closed_geodesic_from_word(self, word)

    def periodic_orbit(self, word) -> PeriodicOrbit:
        return self.closed_geodesic(word).orbit(self)


@dataclass(frozen=True, eq=False)
class ClosedGeodesic:
    """Closed geodesic of the conjugacy class of an axial element.

    ``element`` is the cyclically reduced representative; ``repelling`` and
    ``attracting`` are its fixed points.  ``pieces`` lists, for each cyclic
    rotation of the word, the axis endpoints and the fiber-time interval
    during which that axis crosses the fundamental domain.
    """

    element: GroupElement
    length: float
    repelling: float
    attracting: float
    pieces: tuple = field(default=(), repr=False)

    @property
    def word(self) -> tuple[str, ...]:
        return self.element.word

    @property
    def starts(self) -> np.ndarray:
        durations = [p[3] - p[2] for p in self.pieces]
        return np.concatenate([[0.0], np.cumsum(durations)])

    def vector_at(self, system: SchottkySystem, fiber: float) -> UnitTangentVector:
        """Representative in the fundamental domain of the orbit point at ``fiber``.

        ``fiber`` is a fiber time on the axis of ``element`` itself.
        """
        xm, xp, enter, _ = self.pieces[0]
        tau = (fiber - enter) % self.length
        starts = self.starts
        k = min(int(np.searchsorted(starts, tau, side="right")) - 1, len(self.pieces) - 1)
        xm, xp, enter, _ = self.pieces[k]
        return UnitTangentVector(xm, xp, enter + tau - starts[k], system.basepoint)

    def arrays(self, system: SchottkySystem, fibers) -> tuple[np.ndarray, np.ndarray]:
        """Base points and direction angles of the orbit at many fiber times."""
        fibers = np.asarray(fibers, dtype=float)
        starts = self.starts
        tau = np.mod(fibers - self.pieces[0][2], self.length)
        k = np.clip(np.searchsorted(starts, tau, side="right") - 1, 0, len(self.pieces) - 1)
        coeffs = []
        for xm, xp, enter, _ in self.pieces:
            T = _to_imaginary_axis(xm, xp)
            (a, b), (c, d) = _inv(T)
            coeffs.append((a, b, c, d, math.log(abs(mobius(T, system.basepoint))), enter))
        a, b, c, d, off, enter = (np.array(col)[k] for col in zip(*coeffs))
        u = off + enter + tau - starts[k]
        y = np.exp(u)
        z = (a * 1j * y + b) / (c * 1j * y + d)
        angle = np.pi / 2 - 2 * np.angle(d * np.exp(-u / 2) + 1j * c * np.exp(u / 2))
        return z, angle

    def orbit(self, system: SchottkySystem) -> PeriodicOrbit:
        v = UnitTangentVector(self.repelling, self.attracting, 0.0, system.basepoint, self)
        label = "".join(self.word)
        return PeriodicOrbit(system, v, self.length, label=label)


def closed_geodesic_from_word(system: SchottkySystem, word) -> ClosedGeodesic:
    """Closed geodesic of the conjugacy class of ``word``."""
    word = parse_word(word) if isinstance(word, str) else tuple(word)
    w = cyclic_reduce(word)
    if not w:
        raise DynamicsError("word reduces to the identity")
    g = system.element(w)
    length = translation_length(g)
    rep, att = axis_endpoints(g)
    pieces = []
    for k in range(len(w)):
        rot = w[k:] + w[:k]
        xm, xp = axis_endpoints(system.element(rot))
        back, front = system.disks[inverse_letter(rot[-1])], system.disks[rot[0]]
        enter = geodesic_crossing(xm, xp, back.center, back.radius, system.basepoint)
        leave = geodesic_crossing(xm, xp, front.center, front.radius, system.basepoint)
        if enter is None or leave is None or leave < enter:
            raise DynamicsError(f"axis of rotation {''.join(rot)} misses the fundamental domain")
        pieces.append((xm, xp, enter, leave))
    return ClosedGeodesic(g, length, rep, att, tuple(pieces))


# ---------------------------------------------------------------------------
# quotient metric and closing


def nearest_translate(system: SchottkySystem, v, w, search_radius: int):
    """``(distance, g)`` minimizing ``cover_distance(v, g w)`` over short words.

    Ties are broken by word length, then letter order.
    """
    best = None
    for g in system.elements(search_radius):
        d = cover_distance(v, w.act(g))
        key = (d, len(g.word), g.word)
        if best is None or key < best[0]:
            best = (key, g)
    return best[0][0], best[1]


def quotient_distance(system: SchottkySystem, v, w, search_radius: int) -> float:
    """Upper bound on the distance of ``v`` and ``w`` in ``T^1(H / Gamma)``.

    Symmetrized over both orders so that the surrogate is exactly symmetric.
    """
    if search_radius < 0:
        raise DynamicsError("search radius must be nonnegative")
    d1, _ = nearest_translate(system, v, w, search_radius)
    d2, _ = nearest_translate(system, w, v, search_radius)
    return min(d1, d2)


@dataclass(frozen=True, eq=False)
class GeodesicClosing:
    """Outcome of :func:`close_geodesic_segment`."""

    geodesic: ClosedGeodesic
    element: GroupElement
    return_distance: float
    time: float
    period_slack: float
    shadow_times: tuple
    shadow_distances: tuple
    eps: float

    @property
    def certified(self) -> bool:
        return self.period_slack < self.eps and max(self.shadow_distances) < self.eps


def close_geodesic_segment(
    system: SchottkySystem,
    seg: OrbitSegment,
    params: ClosingParams,
    search_radius: int,
    candidates: Sequence[GroupElement] | None = None,
) -> GeodesicClosing:
    """Closed geodesic shadowing a returning orbit segment.

    The identifying element ``g`` minimizes ``D(flow_t v, g v)`` over reduced
    words of length ``<= search_radius`` (or over ``candidates``); its axis
    carries the periodic vector.
    """
    v, t = seg.start, float(seg.duration)
    if t <= params.t0:
        raise DynamicsError(f"return time {t} does not exceed t0 = {params.t0}")
    u = v.flow(t)
    pool = candidates if candidates is not None else system.elements(search_radius)
    best = None
    for g in pool:
        d = cover_distance(u, v.act(g))
        key = (d, len(g.word), g.word)
        if best is None or key < best[0]:
            best = (key, g)
    dist, g = best[0][0], best[1]
    if dist >= params.delta:
        raise DynamicsError("no return detected")
    if not g.is_axial:
        raise DynamicsError(f"not axial: returning element {g!r}")
    geo = closed_geodesic_from_word(system, g.word) if g.word else None
    rep, att = axis_endpoints(g)
    length = translation_length(g)
    # project the base point of v onto the axis to start the periodic vector
    T = _to_imaginary_axis(rep, att)
    proj = math.log(abs(mobius(T, v.point))) - math.log(abs(mobius(T, system.basepoint)))
    periodic = UnitTangentVector(rep, att, proj, system.basepoint)
    times = (0.0, t / 4, t / 2, 3 * t / 4, min(t, length))
    shadow = tuple(cover_distance(periodic.flow(s), v.flow(s)) for s in times)
    if geo is None:
        geo = ClosedGeodesic(g, length, rep, att)
    return GeodesicClosing(geo, g, dist, t, abs(length - t), times, shadow, params.eps)


def limit_intervals(system: SchottkySystem, depth: int) -> list[tuple[float, float, tuple]]:
    """Intervals ``x1 .. x_{k-1} (D_{xk})`` for all reduced words of length ``depth``."""
    if depth < 1:
        raise DynamicsError("depth must be >= 1")
    out = []
    for w in system.words(depth):
        if len(w) != depth:
            continue
        lo, hi = system.disks[w[-1]].interval
        m = system.element(w[:-1]).matrix
        a, b = mobius(m, lo), mobius(m, hi)
        out.append((min(a, b), max(a, b), w))
    return out


def nonwandering_membership(system: SchottkySystem, v: UnitTangentVector, depth: int) -> bool:
    """Whether both endpoints of ``v`` survive ``depth`` ping-pong refinements."""
    ivs = limit_intervals(system, depth)

    def inside(xi):
        return xi != INF and any(lo <= xi <= hi for lo, hi, _ in ivs)

    return inside(v.xi_minus) and inside(v.xi_plus)


def forward_coding(system: SchottkySystem, xi: float, depth: int) -> tuple[str, ...] | None:
    """Letters of the nested disks containing the boundary point ``xi``.

    Descends the ping-pong tree, testing only the children of the current
    prefix, so the cost is linear in ``depth``.
    """
    if depth < 1:
        raise DynamicsError("depth must be >= 1")
    word: tuple[str, ...] = ()
    m = np.eye(2)
    for _ in range(depth):
        for x in system.letters:
            if word and x == inverse_letter(word[-1]):
                continue
            lo, hi = system.disks[x].interval
            a, b = mobius(m, lo), mobius(m, hi)
            if min(a, b) <= xi <= max(a, b):
                word += (x,)
                m = m @ system.generators[x].matrix
                break
        else:
            return None
    return word


# ---------------------------------------------------------------------------
# invariant test functions


def _bump(r: float) -> float:
    return math.exp(1.0 - 1.0 / (1.0 - r * r)) if r < 1.0 else 0.0


#: sup of |d/dr _bump|, attained near r = 0.577
BUMP_SLOPE = max(
    abs(_bump(r + 1e-7) - _bump(r - 1e-7)) / 2e-7 for r in np.linspace(0.01, 0.99, 9801)
) * 1.001


@dataclass(frozen=True)
class HopfBox:
    """Open ball of hyperbolic radius ``radius`` about ``center`` in the domain."""

    center: complex
    radius: float

    def charges(self, orbit: PeriodicOrbit) -> bool:
        geo = orbit.base.closed
        if geo is None:
            raise DynamicsError("support audits need closed-geodesic orbits")
        for xm, xp, enter, leave in geo.pieces:
            T = _to_imaginary_axis(xm, xp)
            w = mobius(T, self.center)
            # distance from w to the imaginary axis, and where the foot lies
            foot = math.log(abs(w)) - math.log(abs(mobius(T, orbit.base.basepoint)))
            d = math.asinh(abs(w.real) / w.imag)
            s = min(max(foot, enter), leave)
            if s == foot and d < self.radius:
                return True
            z = UnitTangentVector(xm, xp, s, orbit.base.basepoint).point
            if hyperbolic_distance(z, self.center) < self.radius:
                return True
        return False


def bump_function(system: SchottkySystem, center: complex, radius: float,
                  direction: float | None = None, name: str | None = None):
    """Smooth Gamma-invariant bump supported near ``center`` in the domain.

    ``f(v) = phi(d(p, center) / radius) * (1 + cos(angle - direction)) / 2``
    evaluated on the representative of ``v`` in the fundamental domain; the
    support stays inside the domain, so ``f`` is Gamma-invariant and
    Lipschitz for the product metric.
    """
    from .measures import TestFunction

    center = complex(center)
    margin = min(d.distance_from(center) for d in system.disks.values())
    if not system.in_domain(center) or margin <= radius:
        raise DynamicsError("bump support must lie inside the fundamental domain")
    lip_base = BUMP_SLOPE / radius
    lip = math.hypot(lip_base, 0.5) if direction is not None else lip_base

    def evaluate(v: UnitTangentVector) -> float:
        if not system.in_domain(v.point):
            v, _ = system.reduce(v)
        r = hyperbolic_distance(v.point, center) / radius
        val = _bump(r)
        if direction is not None and val:
            val *= 0.5 * (1.0 + math.cos(v.angle - direction))
        return val

    def batch(z: np.ndarray, angle: np.ndarray) -> np.ndarray:
        dist = 2.0 * np.arcsinh(np.abs(z - center) / (2.0 * np.sqrt(z.imag * center.imag)))
        r = np.minimum(dist / radius, 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            val = np.where(r < 1.0, np.exp(1.0 - 1.0 / (1.0 - r * r)), 0.0)
        if direction is not None:
            val = val * 0.5 * (1.0 + np.cos(angle - direction))
        return val

    label = name or f"bump({center.real:g}{center.imag:+g}i, {radius:g}" + (
        f", {direction:.3g})" if direction is not None else ")")
    return TestFunction(evaluate, lip, 1.0, label, batch=batch)


def default_geometric_family(system: SchottkySystem, radius: float = 0.35):
    """Bumps at a few points of the domain, plain and direction-weighted."""
    from .measures import TestFamily

    centers = [1j, 1.5j, 0.5j, 0.3j, 1.2 + 1.2j, -1.2 + 1.2j]
    funcs = []
    for c in centers:
        if not system.in_domain(c):
            continue
        margin = min(d.distance_from(c) for d in system.disks.values())
        r = min(radius, 0.9 * margin)
        funcs.append(bump_function(system, c, r))
        funcs.append(bump_function(system, c, r, direction=0.0))
        funcs.append(bump_function(system, c, r, direction=math.pi))
    return TestFamily(funcs)
