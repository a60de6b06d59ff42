"""
Points, lines, hyperplanes and their pairs over F_q^{d1} x F_q^{d2}, with seeded generators.
"""

from .geometry import (
    FlatArrays,
    Hyperplane,
    HyperplanePair,
    HyperplanePairSet,
    IncidenceSet,
    Line,
    LinePair,
    LinePairSet,
    PointSet,
    as_hyperplane_pairs,
    cartesian,
    common_linepairs,
    enumerate_hyperplanes,
    enumerate_lines,
    hyperplanes_through,
    incident,
    lines_through,
    points_on,
)
from .generators import GENERATOR_KINDS, generate, make_rng, parse_generator, population
from .serialization import dump_set, dumps_set, load_set, loads_set

__all__ = [
    'FlatArrays',
    'GENERATOR_KINDS',
    'Hyperplane',
    'HyperplanePair',
    'HyperplanePairSet',
    'IncidenceSet',
    'Line',
    'LinePair',
    'LinePairSet',
    'PointSet',
    'as_hyperplane_pairs',
    'cartesian',
    'common_linepairs',
    'dump_set',
    'dumps_set',
    'enumerate_hyperplanes',
    'enumerate_lines',
    'generate',
    'hyperplanes_through',
    'incident',
    'lines_through',
    'load_set',
    'loads_set',
    'make_rng',
    'parse_generator',
    'points_on',
    'population',
]
