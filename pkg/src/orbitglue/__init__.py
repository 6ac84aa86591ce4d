"""Periodic-orbit gluing and closing toolkit for Markov shifts and Schottky geodesic flows."""
from .core import ClosingParams, DynamicsError, OrbitSegment, PeriodicOrbit
from .gluing import Certificate, GluingItinerary, certify, execute_gluing, expected_measure, plan_itinerary
from .markov import (
    MarkovSystem,
    SymbolicPoint,
    bracket,
    close_segment,
    connect_words,
    enumerate_periodic,
    sample_path,
    shift_distance,
    stationary_measure,
)
from .measures import (
    PeriodicCombination,
    TestFamily,
    TestFunction,
    bl_distance,
    integrate,
    orbit_measure,
    support_audit,
)
from .schottky import SchottkySystem, UnitTangentVector, close_geodesic_segment, hopf_bracket

__all__ = [
    "Certificate", "ClosingParams", "DynamicsError", "GluingItinerary", "MarkovSystem",
    "OrbitSegment", "PeriodicCombination", "PeriodicOrbit", "SchottkySystem", "SymbolicPoint",
    "TestFamily", "TestFunction", "UnitTangentVector", "bl_distance", "bracket", "certify",
    "close_geodesic_segment", "close_segment", "connect_words", "enumerate_periodic",
    "execute_gluing", "expected_measure", "hopf_bracket", "integrate", "orbit_measure",
    "plan_itinerary", "sample_path", "shift_distance", "stationary_measure", "support_audit",
]
