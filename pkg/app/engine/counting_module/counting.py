"""
# Counting module: exact incidence counts between point-pairs and flat pairs.

Two independent counters:
- naive: tests every (point, flat pair) combination with a vectorized normal-form kernel.
- indexed: walks the cheaper side and looks the other side up in a hash index.
Multiplicities weight each incidence by m(p) * m(l).
"""

import itertools
import logging
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from math import comb, isqrt
from typing import Any, Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.engine.errors import GeometryError
from app.engine.gf_module import FieldSpec
from app.engine.geometry_module import (
    FlatArrays, HyperplanePair, HyperplanePairSet, IncidenceSet, LinePair, LinePairSet, PointSet,
    hyperplanes_through, lines_through,
)

logger = logging.getLogger(__name__)

METHODS = ("naive", "indexed")
_KERNEL_CELLS = 1 << 21


@dataclass(frozen=True)
class IncidenceReport:
    """
    Fields:
    - count (int): I(P, L), multiplicity-weighted.
    - method (str): naive or indexed.
    - elapsed (float): Wall-time seconds.
    """
    count: int
    method: str
    elapsed: float

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class DegreeProfile:
    """
    Per-object incidence degrees.

    For multisets the degree of a point counts the flat pairs through it with their
    multiplicities, and the squared sums run over P and L as lists (each support element
    repeated m times): sum_sq_point = sum_u m(u) * |L_u|^2.
    """
    per_point: Dict[Any, int]
    per_line: Dict[Any, int]
    sum_sq_point: int
    sum_sq_line: int
    point_degree_sum: int
    line_degree_sum: int

    @property
    def incidences(self) -> int:
        return self.point_degree_sum

    @property
    def consistent(self) -> bool:
        return self.point_degree_sum == self.line_degree_sum


# ----- vectorized kernel ------------------------------------------------------------


def relation_matrix(spec: FieldSpec, components: Sequence[np.ndarray], normals: Sequence[np.ndarray],
                    offsets: Sequence[np.ndarray]) -> np.ndarray:
    """
    Boolean (n, m) matrix with entry True iff normals[i][j] . components[i][r] == offsets[i][j] for every i.

    Zero normals are allowed; such a component holds everywhere when its offset is 0 and nowhere otherwise.
    """
    n = components[0].shape[0]
    m = normals[0].shape[0]
    out = np.ones((n, m), dtype=bool)
    for x, a, c in zip(components, normals, offsets):
        if x.shape[1] != a.shape[1]:
            raise GeometryError(f"component of dimension {x.shape[1]} against normals of dimension {a.shape[1]}")
        out &= spec.dot(x[:, None, :], a[None, :, :]) == c[None, :]
    return out


def count_relation(spec: FieldSpec, components: Sequence[np.ndarray], point_weights: np.ndarray,
                   normals: Sequence[np.ndarray], offsets: Sequence[np.ndarray], flat_weights: np.ndarray,
                   workers: int = 1) -> int:
    """Weighted count of the relation above, chunked over points and spread over a thread pool."""
    n = components[0].shape[0]
    m = normals[0].shape[0]
    if n == 0 or m == 0:
        return 0
    width = max(1, sum(a.shape[1] for a in normals))
    rows = max(1, _KERNEL_CELLS // (m * width))
    flat_weights = np.asarray(flat_weights, dtype=np.int64)
    point_weights = np.asarray(point_weights, dtype=np.int64)

    def chunk_count(start: int) -> int:
        stop = min(n, start + rows)
        hits = relation_matrix(spec, [x[start:stop] for x in components], normals, offsets)
        return int(point_weights[start:stop] @ hits.astype(np.int64) @ flat_weights)

    starts = range(0, n, rows)
    if workers <= 1 or len(starts) == 1:
        return sum(chunk_count(s) for s in starts)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(chunk_count, starts))


def _validate(P: PointSet, L: IncidenceSet) -> None:
    if not isinstance(P, PointSet):
        raise GeometryError(f"{type(P).__name__} is not a PointSet")
    if not isinstance(L, (LinePairSet, HyperplanePairSet)):
        raise GeometryError(f"{type(L).__name__} is not a line-pair or hyperplane-pair set")
    if P.spec != L.spec:
        raise GeometryError(f"points over GF({P.spec.q}) against flats over GF({L.spec.q})")
    if tuple(P.dims) != tuple(L.dims):
        raise GeometryError(f"points of dimensions {P.dims} against flats of dimensions {L.dims}")


def _naive(P: PointSet, L: IncidenceSet, workers: int) -> int:
    flats: FlatArrays = L.flat_arrays()
    return count_relation(P.spec, P.component_arrays(), P.weights(), flats.normals, flats.offsets,
                          L.weights(), workers)


# ----- hash-indexed counter ---------------------------------------------------------


def _flats_through(spec: FieldSpec, L: IncidenceSet, point) -> Iterable:
    if isinstance(L, LinePairSet):
        return (LinePair(a, b) for a in lines_through(spec, point[0]) for b in lines_through(spec, point[1]))
    return (HyperplanePair(a, b) for a in hyperplanes_through(spec, point[0])
            for b in hyperplanes_through(spec, point[1]))


def _points_of(spec: FieldSpec, flat) -> Iterable:
    if isinstance(flat, LinePair):
        return flat.points(spec)
    first = [tuple(int(c) for c in row) for row in flat.first.points(spec)]
    second = [tuple(int(c) for c in row) for row in flat.second.points(spec)]
    return itertools.product(first, second)


def _hyperplane_total(q: int, d: int) -> int:
    return (q ** d - 1) // (q - 1)


def indexed_direction(P: PointSet, L: IncidenceSet) -> str:
    """'points' when |P| * (flats through a point) <= |L| * (points on a flat), else 'flats'."""
    q = P.spec.q
    d1, d2 = L.dims
    per_point = _hyperplane_total(q, d1) * _hyperplane_total(q, d2)
    per_flat = q ** (d1 - 1) * q ** (d2 - 1)
    return "points" if P.support_size * per_point <= L.support_size * per_flat else "flats"


def _indexed(P: PointSet, L: IncidenceSet, workers: int) -> int:
    spec = P.spec
    if indexed_direction(P, L) == "points":
        outer, lookup = list(P.items()), L.index
        weights = L.weights()
        neighbours = lambda element: _flats_through(spec, L, element)  # noqa: E731
    else:
        outer, lookup = list(L.items()), P.index
        weights = P.weights()
        neighbours = lambda element: _points_of(spec, element)  # noqa: E731

    def partial(chunk: List[Tuple[Any, int]]) -> int:
        total = 0
        for element, m in chunk:
            hit = 0
            for other in neighbours(element):
                position = lookup.get(other)
                if position is not None:
                    hit += int(weights[position])
            total += m * hit
        return total

    if workers <= 1 or len(outer) < 2 * workers:
        return partial(outer)
    size = -(-len(outer) // workers)
    chunks = [outer[i:i + size] for i in range(0, len(outer), size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(partial, chunks))


def count_incidences(P: PointSet, L: IncidenceSet, method: str = "indexed", workers: int = 1) -> IncidenceReport:
    """
    Exact I(P, L), weighted by m(p) * m(l) for multisets.

    Args:
        P (PointSet): Point-pairs of F_q^{d1} x F_q^{d2}.
        L (LinePairSet | HyperplanePairSet): Flat pairs of the same space.
        method (str): naive or indexed; both return the same count.
        workers (int): Threads for the outer iteration; the count does not depend on it.

    Returns:
        IncidenceReport

    Raises:
        GeometryError: On mismatched fields or dimensions, or an unknown method.
    """
    _validate(P, L)
    if method not in METHODS:
        raise GeometryError(f"unknown counting method {method!r}")
    started = time.perf_counter()
    count = _naive(P, L, workers) if method == "naive" else _indexed(P, L, workers)
    elapsed = time.perf_counter() - started
    logger.debug("I(P,L)=%d method=%s |P|=%d |L|=%d %.4fs", count, method, P.total, L.total, elapsed)
    return IncidenceReport(count=count, method=method, elapsed=elapsed)


def degree_profile(P: PointSet, L: IncidenceSet) -> DegreeProfile:
    """
    Degrees |L_u| of every support point and |P_l| of every support flat pair.

    Example:
        q=2 full/full gives |L_u| = 9 for every point and sum_sq_point = 16 * 81 = 1296.
    """
    _validate(P, L)
    flats = L.flat_arrays()
    hits = relation_matrix(P.spec, P.component_arrays(), flats.normals, flats.offsets).astype(np.int64)
    wp, wl = P.weights(), L.weights()
    point_degree = hits @ wl if hits.size else np.zeros(P.support_size, dtype=np.int64)
    line_degree = wp @ hits if hits.size else np.zeros(L.support_size, dtype=np.int64)
    incidences = int(wp @ point_degree) if P.support_size else 0
    return DegreeProfile(
        per_point={u: int(v) for u, v in zip(P.support, point_degree)},
        per_line={ell: int(v) for ell, v in zip(L.support, line_degree)},
        sum_sq_point=int(wp @ (point_degree * point_degree)) if P.support_size else 0,
        sum_sq_line=int(wl @ (line_degree * line_degree)) if L.support_size else 0,
        point_degree_sum=incidences,
        line_degree_sum=int(wl @ line_degree) if L.support_size else 0,
    )


# ----- Cauchy-Schwarz chain ---------------------------------------------------------


def max_common_points(q: int, d1: int, d2: int) -> int:
    """Most points two distinct flat pairs can share: one component equal, the other meeting in codimension 2."""
    return q ** (d1 + d2 - 3)


def max_common_flats(q: int, d1: int, d2: int) -> int:
    """Most flat pairs through two distinct points: equal in one component, distinct in the other."""
    through = _hyperplane_total
    through_two = [(q ** (d - 1) - 1) // (q - 1) for d in (d1, d2)]
    return max(through(q, d1) * through_two[1], through_two[0] * through(q, d2))


@dataclass(frozen=True)
class CsChain:
    """
    The inequalities chained in the Cauchy-Schwarz incidence argument, evaluated exactly.

    Fields:
    - point_side_ok / line_side_ok: I^2 <= |P| * sum|L_u|^2 and I^2 <= |L| * sum|P_l|^2 (always hold).
    - point_pairs_bound: I + q^{d1+d2-3} * |L|(|L|-1), ordered pairs of distinct flats (holds for sets).
    - point_pairs_unordered_bound: I + q * C(|L|, 2), the unordered variant (may fail).
    - line_pairs_bound: I + c * |P|(|P|-1) with c the most flat pairs through two distinct points.
    - line_pairs_unordered_bound: I + C(|P|, 2), assuming a single flat pair through two points (may fail).
    """
    incidences: int
    sum_sq_point: int
    sum_sq_line: int
    point_side_ok: bool
    line_side_ok: bool
    point_pairs_bound: int
    point_pairs_ok: bool
    point_pairs_unordered_bound: int
    point_pairs_unordered_ok: bool
    line_pairs_bound: int
    line_pairs_ok: bool
    line_pairs_unordered_bound: int
    line_pairs_unordered_ok: bool
    sets_only: bool

    @property
    def hard_ok(self) -> bool:
        """Checks that must hold; the ordered-pair bounds only bind when neither side repeats elements."""
        ok = self.point_side_ok and self.line_side_ok
        if self.sets_only:
            ok = ok and self.point_pairs_ok and self.line_pairs_ok
        return ok

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def cs_chain(P: PointSet, L: IncidenceSet, profile: Optional[DegreeProfile] = None) -> CsChain:
    profile = profile or degree_profile(P, L)
    q = P.spec.q
    d1, d2 = L.dims
    I = profile.incidences
    nP, nL = P.total, L.total
    ordered_points = I + max_common_points(q, d1, d2) * nL * (nL - 1)
    unordered_points = I + q * comb(nL, 2)
    ordered_lines = I + max_common_flats(q, d1, d2) * nP * (nP - 1)
    unordered_lines = I + comb(nP, 2)
    return CsChain(
        incidences=I,
        sum_sq_point=profile.sum_sq_point,
        sum_sq_line=profile.sum_sq_line,
        point_side_ok=I * I <= nP * profile.sum_sq_point,
        line_side_ok=I * I <= nL * profile.sum_sq_line,
        point_pairs_bound=ordered_points,
        point_pairs_ok=profile.sum_sq_point <= ordered_points,
        point_pairs_unordered_bound=unordered_points,
        point_pairs_unordered_ok=profile.sum_sq_point <= unordered_points,
        line_pairs_bound=ordered_lines,
        line_pairs_ok=profile.sum_sq_line <= ordered_lines,
        line_pairs_unordered_bound=unordered_lines,
        line_pairs_unordered_ok=profile.sum_sq_line <= unordered_lines,
        sets_only=not (P.is_multiset or L.is_multiset),
    )


# ----- energy lemma -----------------------------------------------------------------


@dataclass
class EnergyQuery:
    """
    A map phi from a finite domain X into Z, with a target set Y inside Z.

    Fields:
    - domain (Sequence): X, repetitions allowed (treated as a list).
    - phi (Callable): Total on X; values must be hashable.
    - target (Iterable): Y.
    - codomain (Iterable, optional): Z, only used to validate that phi lands inside it.
    """
    domain: Sequence[Any]
    phi: Callable[[Any], Hashable]
    target: Iterable[Hashable]
    codomain: Optional[Iterable[Hashable]] = None


@dataclass(frozen=True)
class EnergyResult:
    solutions: int
    energy: int
    target_size: int

    @property
    def bound_ok(self) -> bool:
        """solutions <= sqrt(|Y| * energy), compared exactly on squares."""
        return self.solutions * self.solutions <= self.target_size * self.energy

    @property
    def bound(self) -> float:
        return float(np.sqrt(self.target_size * self.energy))

    def as_dict(self) -> Dict[str, Any]:
        return {**asdict(self), "bound": self.bound, "bound_ok": self.bound_ok}


def energy_of(values: Iterable[Hashable]) -> int:
    """Ordered pairs (x, x') with equal values, diagonal included."""
    return sum(c * c for c in Counter(values).values())


def phi_solutions(query: EnergyQuery) -> EnergyResult:
    """
    Count |{(x, y) in X x Y : phi(x) = y}| and the energy of phi.

    Example:
        X = {1, 2, 3, 4}, phi(x) = x mod 2, Y = {0}: solutions 2, energy 8.

    Raises:
        GeometryError: If phi leaves the declared codomain.
    """
    values = [query.phi(x) for x in query.domain]
    if query.codomain is not None:
        codomain = set(query.codomain)
        stray = next((v for v in values if v not in codomain), None)
        if stray is not None:
            raise GeometryError(f"phi value {stray!r} outside the codomain")
    target = set(query.target)
    counts = Counter(values)
    solutions = sum(counts[y] for y in target)
    return EnergyResult(solutions=solutions, energy=sum(c * c for c in counts.values()), target_size=len(target))


def exact_sqrt_le(lhs: int, radicand: int) -> bool:
    """lhs <= sqrt(radicand) for non-negative integers, without floating point."""
    if lhs < 0:
        return True
    return lhs <= isqrt(radicand)
