"""
# Seeded generators for experiment inputs.

Every generator is a pure function of (field, kind, seed, params). Random kinds draw
without replacement from the deterministic enumeration order, then return the sample
in that order.
"""

from typing import Any, Dict, Optional, Tuple

import numpy as np

from app.engine.errors import GeometryError, SizeCapError
from app.engine.gf_module import FieldSpec
from app.engine.projective_module import proj_count, proj_point_array
from app.engine.geometry_module.geometry import (
    MAX_DIMENSION, MAX_MULTIPLICITY, Hyperplane, HyperplanePair, HyperplanePairSet, Line, LinePair,
    LinePairSet, PointSet, cartesian, enumerate_lines,
)

MAX_FULL_POPULATION = 2 ** 22

GENERATOR_KINDS = (
    "full_points", "full_vectors", "full_linepairs", "full_hyperplanepairs",
    "random_points", "random_vectors", "random_linepairs", "random_hyperplanepairs",
    "cartesian", "multiset_random",
)

# Independent rng streams per role, so A and B of a product never share draws.
STREAM_DEFAULT = 0
STREAM_A = 1
STREAM_B = 2
STREAM_MULTIPLICITY = 3


def make_rng(seed: int, *streams: int) -> np.random.Generator:
    """Independent generator per (seed, streams...) key; no streams means STREAM_DEFAULT."""
    if seed < 0 or seed >= 2 ** 64:
        raise GeometryError(f"seed {seed} is not a 64-bit unsigned integer")
    key = [int(seed)] + [int(s) for s in (streams or (STREAM_DEFAULT,))]
    return np.random.default_rng(np.random.SeedSequence(key))


def _sample_indices(rng: np.random.Generator, population: int, n: int) -> np.ndarray:
    if n < 0:
        raise GeometryError(f"sample size {n} is negative")
    if n > population:
        raise GeometryError(f"sample size {n} exceeds population {population}")
    if population <= MAX_FULL_POPULATION:
        chosen = rng.permutation(population)[:n]
    else:
        chosen = rng.choice(population, size=n, replace=False)
    return np.sort(chosen)


def _digits(q: int, index: int, width: int) -> Tuple[int, ...]:
    out = []
    for _ in range(width):
        index, r = divmod(int(index), q)
        out.append(r)
    return tuple(reversed(out))


def _check_dims(*dims: int) -> None:
    for d in dims:
        if not 1 <= d <= MAX_DIMENSION:
            raise GeometryError(f"dimension {d} outside 1..{MAX_DIMENSION}")


def _check_full(population: int, what: str) -> None:
    if population > MAX_FULL_POPULATION:
        raise SizeCapError(f"full {what} set has {population} elements, above the cap {MAX_FULL_POPULATION}")


def _point_from_index(q: int, index: int, dims: Tuple[int, ...]):
    flat = _digits(q, index, sum(dims))
    out, start = [], 0
    for d in dims:
        out.append(flat[start:start + d])
        start += d
    return tuple(out)


def _line_from_index(q: int, index: int) -> Line:
    if index < q * q:
        return Line.nonvertical(index // q, index % q)
    return Line.vertical(index - q * q)


def _hyperplane_from_index(spec: FieldSpec, d: int, index: int) -> Hyperplane:
    normals = proj_point_array(spec, d - 1) if d > 1 else np.ones((1, 1), dtype=np.int64)
    normal, offset = divmod(int(index), spec.q)
    return Hyperplane(tuple(int(a) for a in normals[normal]), offset)


def _hyperplane_count(q: int, d: int) -> int:
    return q * (proj_count(q, d - 1) if d > 1 else 1)


def population(q: int, kind: str, **params: Any) -> int:
    """Size of the ground set a random kind samples from."""
    d1, d2 = int(params.get("d1", 2)), int(params.get("d2", 2))
    if kind == "random_points" or (kind == "multiset_random" and params.get("target", "points") == "points"):
        return q ** (d1 + d2)
    if kind == "random_vectors":
        return q ** int(params.get("d", 2))
    if kind == "random_linepairs" or (kind == "multiset_random" and params.get("target") == "linepairs"):
        line_count = q * q if params.get("nonvertical_only") else q * q + q
        return line_count * line_count
    if kind == "random_hyperplanepairs" or kind == "multiset_random":
        return _hyperplane_count(q, d1) * _hyperplane_count(q, d2)
    raise GeometryError(f"generator {kind!r} does not sample")


# ----- kinds ------------------------------------------------------------------------


def _points(spec: FieldSpec, indices, dims) -> PointSet:
    return PointSet(spec, dims, [_point_from_index(spec.q, i, dims) for i in indices])


def _linepairs(spec: FieldSpec, indices, line_count: int) -> LinePairSet:
    q = spec.q
    return LinePairSet(spec, [LinePair(_line_from_index(q, i // line_count), _line_from_index(q, i % line_count))
                              for i in indices])


def _hyperplanepairs(spec: FieldSpec, indices, d1: int, d2: int) -> HyperplanePairSet:
    count2 = _hyperplane_count(spec.q, d2)
    return HyperplanePairSet(spec, (d1, d2), [
        HyperplanePair(_hyperplane_from_index(spec, d1, i // count2), _hyperplane_from_index(spec, d2, i % count2))
        for i in indices
    ])


def full_points(spec: FieldSpec, d1: int = 2, d2: int = 2) -> PointSet:
    _check_dims(d1, d2)
    population = spec.q ** (d1 + d2)
    _check_full(population, "point")
    return _points(spec, range(population), (d1, d2))


def full_vectors(spec: FieldSpec, d: int = 2) -> PointSet:
    _check_dims(d)
    population = spec.q ** d
    _check_full(population, "vector")
    return _points(spec, range(population), (d,))


def full_linepairs(spec: FieldSpec) -> LinePairSet:
    lines = enumerate_lines(spec)
    _check_full(len(lines) ** 2, "line-pair")
    return LinePairSet(spec, [LinePair(a, b) for a in lines for b in lines])


def full_hyperplanepairs(spec: FieldSpec, d1: int = 2, d2: int = 2) -> HyperplanePairSet:
    _check_dims(d1, d2)
    population = _hyperplane_count(spec.q, d1) * _hyperplane_count(spec.q, d2)
    _check_full(population, "hyperplane-pair")
    return _hyperplanepairs(spec, range(population), d1, d2)


def random_points(spec: FieldSpec, n: int, seed: int, d1: int = 2, d2: int = 2,
                  stream: int = STREAM_DEFAULT) -> PointSet:
    _check_dims(d1, d2)
    indices = _sample_indices(make_rng(seed, stream), spec.q ** (d1 + d2), n)
    return _points(spec, indices, (d1, d2))


def random_vectors(spec: FieldSpec, n: int, seed: int, d: int = 2, stream: int = STREAM_DEFAULT) -> PointSet:
    _check_dims(d)
    indices = _sample_indices(make_rng(seed, stream), spec.q ** d, n)
    return _points(spec, indices, (d,))


def random_linepairs(spec: FieldSpec, n: int, seed: int, nonvertical_only: bool = False,
                     stream: int = STREAM_DEFAULT) -> LinePairSet:
    # Non-vertical lines occupy the first q^2 slots of the line enumeration.
    line_count = spec.q * spec.q if nonvertical_only else spec.q * spec.q + spec.q
    indices = _sample_indices(make_rng(seed, stream), line_count * line_count, n)
    return _linepairs(spec, indices, line_count)


def random_hyperplanepairs(spec: FieldSpec, n: int, seed: int, d1: int = 2, d2: int = 2,
                           stream: int = STREAM_DEFAULT) -> HyperplanePairSet:
    _check_dims(d1, d2)
    population = _hyperplane_count(spec.q, d1) * _hyperplane_count(spec.q, d2)
    indices = _sample_indices(make_rng(seed, stream), population, n)
    return _hyperplanepairs(spec, indices, d1, d2)


def multiset_random(spec: FieldSpec, n: int, max_mult: int, seed: int, target: str = "points",
                    d1: int = 2, d2: int = 2, nonvertical_only: bool = False, stream: Optional[int] = None):
    """
    n distinct support elements, each with a multiplicity drawn uniformly from 1..max_mult.

    Args:
        target (str): "points", "linepairs" or "hyperplanepairs".
        stream (int, optional): rng stream; defaults to STREAM_A for points and STREAM_B for flat pairs,
            so a point multiset and a flat multiset of the same seed are independent.
    """
    if not 1 <= max_mult <= MAX_MULTIPLICITY:
        raise GeometryError(f"max_mult {max_mult} outside 1..{MAX_MULTIPLICITY}")
    if stream is None:
        stream = STREAM_A if target == "points" else STREAM_B
    if target == "points":
        base = random_points(spec, n, seed, d1, d2, stream)
    elif target == "linepairs":
        base = random_linepairs(spec, n, seed, nonvertical_only, stream)
    elif target == "hyperplanepairs":
        base = random_hyperplanepairs(spec, n, seed, d1, d2, stream)
    else:
        raise GeometryError(f"unknown multiset target {target!r}")
    weights = make_rng(seed, stream, STREAM_MULTIPLICITY).integers(1, max_mult + 1, size=base.support_size)
    if isinstance(base, PointSet):
        return PointSet(spec, base.dims, base.support, weights.tolist())
    if isinstance(base, LinePairSet):
        return LinePairSet(spec, base.support, weights.tolist())
    return HyperplanePairSet(spec, base.dims, base.support, weights.tolist())


def generate(spec: FieldSpec, kind: str, seed: int = 0, **params: Any):
    """
    Build an experiment input set.

    Args:
        spec (FieldSpec): The field.
        kind (str): One of GENERATOR_KINDS.
        seed (int): 64-bit seed; ignored by the full_* kinds.
        **params: Kind parameters. `cartesian` takes either prebuilt point sets `A` and `B`
            or sizes `na` and `nb` for seeded random subsets of F_q^2. The random kinds accept
            `stream` to draw from an independent rng stream of the same seed.

    Returns:
        PointSet | LinePairSet | HyperplanePairSet

    Raises:
        GeometryError: For unknown kinds, bad parameters or n above the population.
    """
    stream = int(params.get("stream", STREAM_DEFAULT))
    try:
        if kind == "full_points":
            return full_points(spec, params.get("d1", 2), params.get("d2", 2))
        if kind == "full_vectors":
            return full_vectors(spec, params.get("d", 2))
        if kind == "full_linepairs":
            return full_linepairs(spec)
        if kind == "full_hyperplanepairs":
            return full_hyperplanepairs(spec, params.get("d1", 2), params.get("d2", 2))
        if kind == "random_points":
            return random_points(spec, params["n"], seed, params.get("d1", 2), params.get("d2", 2), stream)
        if kind == "random_vectors":
            return random_vectors(spec, params["n"], seed, params.get("d", 2), stream)
        if kind == "random_linepairs":
            return random_linepairs(spec, params["n"], seed, bool(params.get("nonvertical_only", False)), stream)
        if kind == "random_hyperplanepairs":
            return random_hyperplanepairs(spec, params["n"], seed, params.get("d1", 2), params.get("d2", 2), stream)
        if kind == "cartesian":
            A = params.get("A")
            B = params.get("B")
            if A is None:
                A = random_vectors(spec, params["na"], seed, 2, STREAM_A)
            if B is None:
                B = random_vectors(spec, params["nb"], seed, 2, STREAM_B)
            return cartesian(spec, A, B)
        if kind == "multiset_random":
            return multiset_random(spec, params["n"], params["max_mult"], seed, params.get("target", "points"),
                                   params.get("d1", 2), params.get("d2", 2),
                                   bool(params.get("nonvertical_only", False)), params.get("stream"))
    except KeyError as e:
        raise GeometryError(f"generator {kind!r} is missing parameter {e.args[0]!r}") from e
    raise GeometryError(f"unknown generator kind {kind!r}")


def _parse_value(raw: str):
    lowered = raw.strip().lower()
    if lowered in ("true", "false", "yes", "no"):
        return lowered in ("true", "yes")
    try:
        return int(raw)
    except ValueError:
        return raw.strip()


def parse_generator(text: str) -> Tuple[str, Dict[str, Any]]:
    """
    Parse `kind:key=value,key=value` into (kind, params).

    Example:
        >>> parse_generator("random_linepairs:n=5,nonvertical_only=true")
        ('random_linepairs', {'n': 5, 'nonvertical_only': True})
    """
    kind, _, rest = text.strip().partition(":")
    if kind not in GENERATOR_KINDS:
        raise GeometryError(f"unknown generator kind {kind!r}")
    params: Dict[str, Any] = {}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            # bare flag, e.g. random_linepairs:n=5,nonvertical_only
            params[key] = True
            continue
        params[key.strip()] = _parse_value(value)
    return kind, params
