"""
# Geometry module: affine objects of the product space F_q^{d1} x F_q^{d2}.

Points are tuples of components, one tuple of encodings per factor; a point-pair in
F_q^2 x F_q^2 reads ((x1, y1), (x2, y2)). Lines of the plane are kept in
slope-intercept-or-vertical form, hyperplanes in canonical normal form.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from app.engine.errors import GeometryError, SizeCapError
from app.engine.gf_module import FieldSpec
from app.engine.projective_module import proj_point_array

MAX_LINE_FIELD_ORDER = 2 ** 10
MAX_MULTIPLICITY = 2 ** 16
MAX_DIMENSION = 4

Point = Tuple[Tuple[int, ...], ...]


# ----- lines and hyperplanes --------------------------------------------------------


@dataclass(frozen=True)
class Line:
    """
    A line of F_q^2.

    Fields:
    - slope (int, optional): s in Y = sX + t; None marks the vertical line X = x0.
    - intercept (int): t for non-vertical lines, the abscissa x0 for vertical ones.
    """
    slope: Optional[int]
    intercept: int

    @classmethod
    def nonvertical(cls, s: int, t: int) -> "Line":
        return cls(int(s), int(t))

    @classmethod
    def vertical(cls, x0: int) -> "Line":
        return cls(None, int(x0))

    @property
    def is_vertical(self) -> bool:
        return self.slope is None

    def sort_key(self) -> Tuple[int, int, int]:
        return (1, 0, self.intercept) if self.is_vertical else (0, self.slope, self.intercept)

    def contains(self, spec: FieldSpec, point: Sequence[int]) -> bool:
        x, y = int(point[0]), int(point[1])
        if self.is_vertical:
            return x == self.intercept
        return y == spec.add(spec.mul(self.slope, x), self.intercept)

    def points(self, spec: FieldSpec) -> List[Tuple[int, int]]:
        if self.is_vertical:
            return [(self.intercept, y) for y in range(spec.q)]
        return [(x, spec.add(spec.mul(self.slope, x), self.intercept)) for x in range(spec.q)]

    def normal_form(self, spec: FieldSpec) -> Tuple[int, int, int]:
        """(a, b, c) with aX + bY = c."""
        if self.is_vertical:
            return (1, 0, self.intercept)
        return (spec.neg(self.slope), 1, self.intercept)

    def to_hyperplane(self, spec: FieldSpec) -> "Hyperplane":
        a, b, c = self.normal_form(spec)
        return Hyperplane.canonical(spec, (a, b), c)

    def __str__(self) -> str:
        if self.is_vertical:
            return f"X={self.intercept}"
        return f"Y={self.slope}X+{self.intercept}"


@dataclass(frozen=True)
class Hyperplane:
    """
    The hyperplane normal . x = offset of F_q^d, normal canonical (first nonzero coordinate 1).
    """
    normal: Tuple[int, ...]
    offset: int

    @classmethod
    def canonical(cls, spec: FieldSpec, normal: Sequence[int], offset: int) -> "Hyperplane":
        normal = tuple(int(a) for a in normal)
        pivot = next((a for a in normal if a != 0), None)
        if pivot is None:
            raise GeometryError("hyperplane normal vector is zero")
        scale = spec.inv(pivot)
        return cls(tuple(spec.mul(a, scale) for a in normal), spec.mul(int(offset), scale))

    @property
    def d(self) -> int:
        return len(self.normal)

    def contains(self, spec: FieldSpec, point: Sequence[int]) -> bool:
        if len(point) != self.d:
            raise GeometryError(f"point of dimension {len(point)} tested against a hyperplane of F_q^{self.d}")
        return int(spec.dot(np.array(self.normal), np.array(point))) == self.offset

    def points(self, spec: FieldSpec) -> np.ndarray:
        """All q^{d-1} solutions as a (q^{d-1}, d) array."""
        pivot = next(i for i, a in enumerate(self.normal) if a != 0)
        free = [i for i in range(self.d) if i != pivot]
        grid = np.indices((spec.q,) * len(free)).reshape(len(free), -1).T
        out = np.zeros((grid.shape[0], self.d), dtype=np.int64)
        out[:, free] = grid
        partial = spec.dot(out[:, free], np.array([self.normal[i] for i in free], dtype=np.int64)[None, :]) \
            if free else np.zeros(grid.shape[0], dtype=np.int64)
        # normal[pivot] == 1, so x_pivot = offset - sum over the free coordinates
        out[:, pivot] = spec.sub(np.full(grid.shape[0], self.offset, dtype=np.int64), partial)
        return out


@dataclass(frozen=True)
class LinePair:
    """A pair of lines (first in the first factor F_q^2, second in the second factor)."""
    first: Line
    second: Line

    @property
    def nonvertical(self) -> bool:
        return not (self.first.is_vertical or self.second.is_vertical)

    @property
    def components(self) -> Tuple[Line, Line]:
        return (self.first, self.second)

    def sort_key(self):
        return (self.first.sort_key(), self.second.sort_key())

    def contains(self, spec: FieldSpec, point: Point) -> bool:
        return self.first.contains(spec, point[0]) and self.second.contains(spec, point[1])

    def points(self, spec: FieldSpec) -> List[Point]:
        return [(a, b) for a in self.first.points(spec) for b in self.second.points(spec)]

    def to_hyperplane_pair(self, spec: FieldSpec) -> "HyperplanePair":
        return HyperplanePair(self.first.to_hyperplane(spec), self.second.to_hyperplane(spec))

    def __str__(self) -> str:
        return f"({self.first}, {self.second})"


@dataclass(frozen=True)
class HyperplanePair:
    """A pair of hyperplanes, one in each factor of F_q^{d1} x F_q^{d2}."""
    first: Hyperplane
    second: Hyperplane

    @property
    def components(self) -> Tuple[Hyperplane, Hyperplane]:
        return (self.first, self.second)

    @property
    def dims(self) -> Tuple[int, int]:
        return (self.first.d, self.second.d)

    def contains(self, spec: FieldSpec, point: Point) -> bool:
        return self.first.contains(spec, point[0]) and self.second.contains(spec, point[1])


def incident(spec: FieldSpec, point: Point, flat_pair) -> bool:
    """True iff each component of the point lies on the matching component of the line- or hyperplane-pair."""
    if len(point) != 2:
        raise GeometryError("incidence is defined between point-pairs and flat pairs")
    return flat_pair.contains(spec, point)


# ----- enumerations -----------------------------------------------------------------


def _check_line_field(spec: FieldSpec) -> None:
    if spec.q > MAX_LINE_FIELD_ORDER:
        raise SizeCapError(f"line enumeration is capped at q <= {MAX_LINE_FIELD_ORDER}, got {spec.q}")


def enumerate_lines(spec: FieldSpec) -> List[Line]:
    """All q^2 non-vertical lines ordered by (s, t), then the q vertical lines by abscissa."""
    _check_line_field(spec)
    lines = [Line.nonvertical(s, t) for s in range(spec.q) for t in range(spec.q)]
    lines.extend(Line.vertical(x0) for x0 in range(spec.q))
    return lines


def lines_through(spec: FieldSpec, point: Sequence[int]) -> List[Line]:
    """The q+1 lines through a point of F_q^2: one per slope, then the vertical line."""
    x, y = int(point[0]), int(point[1])
    lines = [Line.nonvertical(s, spec.sub(y, spec.mul(s, x))) for s in range(spec.q)]
    lines.append(Line.vertical(x))
    return lines


def enumerate_hyperplanes(spec: FieldSpec, d: int) -> List[Hyperplane]:
    """All q(q^d-1)/(q-1) hyperplanes of F_q^d, ordered by canonical normal then offset."""
    if not 1 <= d <= MAX_DIMENSION:
        raise GeometryError(f"dimension {d} outside 1..{MAX_DIMENSION}")
    normals = proj_point_array(spec, d - 1) if d > 1 else np.ones((1, 1), dtype=np.int64)
    return [Hyperplane(tuple(int(a) for a in normal), c) for normal in normals for c in range(spec.q)]


def hyperplanes_through(spec: FieldSpec, point: Sequence[int]) -> List[Hyperplane]:
    """The (q^d-1)/(q-1) hyperplanes through a point of F_q^d."""
    d = len(point)
    normals = proj_point_array(spec, d - 1) if d > 1 else np.ones((1, 1), dtype=np.int64)
    offsets = spec.dot(normals, np.asarray(point, dtype=np.int64)[None, :])
    return [Hyperplane(tuple(int(a) for a in normal), int(c)) for normal, c in zip(normals, offsets)]


def common_linepairs(spec: FieldSpec, x: Point, y: Point) -> int:
    """Number of line-pairs of F_q^2 x F_q^2 through both point-pairs x and y, by enumeration."""
    count = 1
    for xi, yi in zip(x, y):
        through_x = set(lines_through(spec, xi))
        count *= sum(1 for line in lines_through(spec, yi) if line in through_x)
    return count


# ----- sets and multisets -----------------------------------------------------------


class IncidenceSet:
    """
    A finite collection of geometric elements with optional multiplicities.

    The support keeps first-seen order; duplicates in the input are merged by summing
    their multiplicities. |X| is `total`, the sum of multiplicities over the support.
    """

    kind = "elements"

    def __init__(self, spec: FieldSpec, elements: Iterable, multiplicities: Optional[Iterable[int]] = None):
        self.spec = spec
        counts: Dict = {}
        if multiplicities is None:
            for element in elements:
                counts[element] = counts.get(element, 0) + 1
        else:
            for element, m in zip(elements, multiplicities):
                if int(m) < 1:
                    raise GeometryError(f"multiplicity {m} must be a positive integer")
                counts[element] = counts.get(element, 0) + int(m)
        for element, m in counts.items():
            if m > MAX_MULTIPLICITY:
                raise GeometryError(f"multiplicity {m} exceeds the cap {MAX_MULTIPLICITY}")
        self._support = tuple(counts)
        self._multiplicity = tuple(counts.values())
        self.is_multiset = any(m != 1 for m in self._multiplicity)

    @property
    def support(self) -> Tuple:
        return self._support

    @property
    def support_size(self) -> int:
        return len(self._support)

    @property
    def total(self) -> int:
        return sum(self._multiplicity)

    @property
    def sum_sq_multiplicity(self) -> int:
        return sum(m * m for m in self._multiplicity)

    def weights(self) -> np.ndarray:
        return np.array(self._multiplicity, dtype=np.int64)

    def multiplicity(self, element) -> int:
        position = self.index.get(element)
        return 0 if position is None else self._multiplicity[position]

    def items(self) -> Iterator[Tuple[object, int]]:
        return zip(self._support, self._multiplicity)

    @cached_property
    def index(self) -> Dict:
        return {element: i for i, element in enumerate(self._support)}

    def __iter__(self):
        return iter(self._support)

    def __contains__(self, element) -> bool:
        return element in self.index

    def __repr__(self) -> str:
        return f"{type(self).__name__}(q={self.spec.q}, support={self.support_size}, total={self.total})"


class PointSet(IncidenceSet):
    """
    Points of a product space (dims = (d1, d2)) or of a single space (dims = (d,)).

    Elements are tuples of component tuples; single-space points may be given flat.
    """

    kind = "points"

    def __init__(self, spec: FieldSpec, dims: Sequence[int], elements: Iterable,
                 multiplicities: Optional[Iterable[int]] = None):
        self.dims = tuple(int(d) for d in dims)
        if not self.dims or any(not 1 <= d <= MAX_DIMENSION for d in self.dims):
            raise GeometryError(f"unsupported dimensions {self.dims}")
        super().__init__(spec, (self._normalize(spec, e) for e in elements), multiplicities)

    def _normalize(self, spec: FieldSpec, element) -> Point:
        if len(self.dims) == 1 and element and not isinstance(element[0], (tuple, list)):
            element = (element,)
        point = tuple(tuple(int(c) for c in component) for component in element)
        if tuple(len(c) for c in point) != self.dims:
            raise GeometryError(f"point {element} does not match dimensions {self.dims}")
        if any(not 0 <= c < spec.q for component in point for c in component):
            raise GeometryError(f"point {element} has coordinates outside GF({spec.q})")
        return point

    def array(self) -> np.ndarray:
        """Flat (support_size, sum(dims)) coordinate array."""
        width = sum(self.dims)
        if not self._support:
            return np.zeros((0, width), dtype=np.int64)
        return np.array([[c for component in p for c in component] for p in self._support], dtype=np.int64)

    def component_arrays(self) -> Tuple[np.ndarray, ...]:
        flat = self.array()
        out, start = [], 0
        for d in self.dims:
            out.append(flat[:, start:start + d])
            start += d
        return tuple(out)

    def flat_points(self) -> List[Tuple[int, ...]]:
        return [tuple(c for component in p for c in component) for p in self._support]


@dataclass(frozen=True)
class FlatArrays:
    """Normal-form arrays of a flat-pair collection: component i is normals[i] . x_i = offsets[i]."""
    normals: Tuple[np.ndarray, np.ndarray]
    offsets: Tuple[np.ndarray, np.ndarray]


class LinePairSet(IncidenceSet):
    """Line-pairs of F_q^2 x F_q^2."""

    kind = "linepairs"
    dims = (2, 2)

    def __init__(self, spec: FieldSpec, elements: Iterable[LinePair],
                 multiplicities: Optional[Iterable[int]] = None):
        elements = list(elements)
        for ell in elements:
            if not isinstance(ell, LinePair):
                raise GeometryError(f"{ell!r} is not a LinePair")
        super().__init__(spec, elements, multiplicities)

    @property
    def nonvertical(self) -> bool:
        return all(ell.nonvertical for ell in self._support)

    def hyperplane_pairs(self) -> "HyperplanePairSet":
        return HyperplanePairSet(self.spec, (2, 2), [ell.to_hyperplane_pair(self.spec) for ell in self._support],
                                 self._multiplicity)

    def flat_arrays(self) -> FlatArrays:
        return self.hyperplane_pairs().flat_arrays()


class HyperplanePairSet(IncidenceSet):
    """Hyperplane-pairs of F_q^{d1} x F_q^{d2}."""

    kind = "hyperplanepairs"

    def __init__(self, spec: FieldSpec, dims: Sequence[int], elements: Iterable[HyperplanePair],
                 multiplicities: Optional[Iterable[int]] = None):
        self.dims = tuple(int(d) for d in dims)
        elements = list(elements)
        for h in elements:
            if not isinstance(h, HyperplanePair) or h.dims != self.dims:
                raise GeometryError(f"{h!r} is not a hyperplane-pair of dimensions {self.dims}")
        super().__init__(spec, elements, multiplicities)

    def flat_arrays(self) -> FlatArrays:
        normals, offsets = [], []
        for i, d in enumerate(self.dims):
            if self._support:
                normals.append(np.array([h.components[i].normal for h in self._support], dtype=np.int64))
                offsets.append(np.array([h.components[i].offset for h in self._support], dtype=np.int64))
            else:
                normals.append(np.zeros((0, d), dtype=np.int64))
                offsets.append(np.zeros(0, dtype=np.int64))
        return FlatArrays(normals=tuple(normals), offsets=tuple(offsets))


def as_hyperplane_pairs(flats: IncidenceSet) -> HyperplanePairSet:
    """Normal-form view of a line-pair or hyperplane-pair collection."""
    if isinstance(flats, LinePairSet):
        return flats.hyperplane_pairs()
    if isinstance(flats, HyperplanePairSet):
        return flats
    raise GeometryError(f"{type(flats).__name__} is not a collection of flat pairs")


def cartesian(spec: FieldSpec, A: PointSet, B: PointSet) -> PointSet:
    """
    The point-pairs ((a1, b1), (a2, b2)) for a in A, b in B.

    A supplies the abscissas of both components and B the ordinates, so a line-pair
    (Y = s1X + t1, Y = s2X + t2) meets the set in the solutions of s_i a_i + t_i = b_i.
    """
    if A.dims != (2,) or B.dims != (2,):
        raise GeometryError("cartesian products take two point sets of F_q^2")
    elements, weights = [], []
    for (a,), ma in A.items():
        for (b,), mb in B.items():
            elements.append(((a[0], b[0]), (a[1], b[1])))
            weights.append(ma * mb)
    return PointSet(spec, (2, 2), elements, weights)


def points_on(spec: FieldSpec, hyperplane: Hyperplane) -> np.ndarray:
    """The q^{d-1} points of F_q^d on a hyperplane."""
    return hyperplane.points(spec)
