"""System-independent orbit primitives.

Both concrete systems (:mod:`orbitglue.markov` and :mod:`orbitglue.schottky`)
expose the same small surface: ``evolve(point, t)``, ``distance(x, y)`` and a
``discrete`` flag telling whether time is integer (maps) or real (flows).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Protocol, runtime_checkable


class DynamicsError(ValueError):
    """Raised when an operation's precondition does not hold."""


@runtime_checkable
class System(Protocol):
    discrete: bool

    def evolve(self, point: Any, t: float) -> Any: ...

    def distance(self, x: Any, y: Any) -> float: ...


@dataclass(frozen=True, eq=False)
class OrbitSegment:
    """A piece of trajectory ``{evolve(start, s) : 0 <= s < duration}``."""

    system: Any
    start: Any
    duration: float

    def __post_init__(self):
        if not self.duration > 0:
            raise DynamicsError("orbit segment duration must be positive")
        if self.system.discrete and int(self.duration) != self.duration:
            raise DynamicsError("map segments need an integer duration")

    def at(self, s: float):
        return self.system.evolve(self.start, s)

    @property
    def end(self):
        return self.at(self.duration)


@dataclass(frozen=True, eq=False)
class PeriodicOrbit:
    """Periodic orbit through ``base`` with primitive period ``period``."""

    system: Any
    base: Any
    period: float
    label: str = ""

    def __post_init__(self):
        if not self.period > 0:
            raise DynamicsError("period must be positive")

    def at(self, s: float):
        return self.system.evolve(self.base, s)


@dataclass(frozen=True)
class ClosingParams:
    """Tolerances of a closing experiment.

    ``eps`` is the shadowing tolerance, ``delta`` the return tolerance and
    ``t0`` the minimal admissible return time.
    """

    eps: float
    delta: float
    t0: float

    def __post_init__(self):
        if min(self.eps, self.delta, self.t0) <= 0:
            raise DynamicsError("closing parameters must be strictly positive")
        if self.delta > self.eps:
            raise DynamicsError("delta must not exceed eps")
