"""Shifted-set intersections: distance sets, recurrence sets, certified searches."""
from .natset import (
    CapacityError,
    HTuple,
    IngestionError,
    NatSet,
    SequenceSpec,
    distance_set,
    h_tuples,
    intersect_shifts,
    realize,
    shift,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "HTuple",
    "IngestionError",
    "NatSet",
    "SequenceSpec",
    "distance_set",
    "h_tuples",
    "intersect_shifts",
    "realize",
    "shift",
]
