"""
# Apps module: dot-product counts, the element-wise sum-product experiment and the
# image of a quadratic vector-valued map, each next to the incidence instance its
# estimate comes from.
"""

import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from app.engine.errors import GeometryError, IncidenceError
from app.engine.gf_module import FieldSpec
from app.engine.geometry_module import (
    Hyperplane, HyperplanePair, HyperplanePairSet, Line, LinePair, LinePairSet, PointSet, cartesian,
)
from app.engine.counting_module import count_incidences, count_relation
from app.engine.theorems_module import BoundReport

logger = logging.getLogger(__name__)

PREDICATE_VARIANTS = ("as_written", "corrected")
DEFAULT_VARIANT = "corrected"


def _ratio(numerator: float, denominator: float) -> float:
    if denominator == 0:
        return 0.0 if numerator == 0 else math.inf
    return float(numerator) / float(denominator)


def _check_target(spec: FieldSpec, value: int, name: str) -> int:
    value = int(value)
    if not 0 <= value < spec.q:
        raise GeometryError(f"{name}={value} is not an element of GF({spec.q})")
    return value


def _require_dims(E: PointSet, dims: Tuple[int, ...], name: str) -> None:
    if tuple(E.dims) != dims:
        raise GeometryError(f"{name} needs a point set of dimensions {dims}, got {E.dims}")


# ----- two-parameter dot products ---------------------------------------------------


@dataclass(frozen=True)
class DotProductReport:
    """
    Fields:
    - a, b (int): Targets.
    - count (int): Ordered pairs of E x E satisfying the predicate.
    - main_term (Fraction): |E|^2 / q^2.
    - bound (float): |E|^2 / q^2 + q^{3/2} |E|.
    - predicate_variant (str): as_written (x.z = a, y.z = b) or corrected (x.z = a, y.t = b).
    - direct_count (int): Pairwise enumeration.
    - reduction_count (int, optional): Incidences with the line-pair multiset; corrected variant only.
    - size (int): |E|.
    - large_set_ratio (float, optional): count / (|E|^2/q^2), set when |E| >= q^{7/2}.
    - multiset_bound (dict): The multiset incidence estimate on the proper line-pairs.
    """
    a: int
    b: int
    count: int
    main_term: Fraction
    bound: float
    predicate_variant: str
    direct_count: int
    reduction_count: Optional[int]
    size: int
    large_set_ratio: Optional[float] = None
    multiset_bound: Dict[str, Any] = field(default_factory=dict)

    @property
    def agree(self) -> bool:
        return self.reduction_count is None or self.reduction_count == self.direct_count

    def as_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["main_term"] = float(self.main_term)
        out["agree"] = self.agree
        return out

    def to_bound_report(self, q: int) -> BoundReport:
        discrepancy = float(abs(self.count - self.main_term))
        return BoundReport(
            f"dot_pairs_{self.predicate_variant}", self.count, self.main_term, self.bound, discrepancy,
            _ratio(self.count, self.bound), True,
            {"q": q, "a": self.a, "b": self.b, "E": self.size, "variant": self.predicate_variant},
            hard=self.reduction_count is not None, passed=self.agree,
            extras={"direct_count": self.direct_count, "reduction_count": self.reduction_count,
                    "large_set_ratio": self.large_set_ratio, **self.multiset_bound},
        )


def _direct_pair_count(spec: FieldSpec, E: PointSet, a: int, b: int, variant: str) -> int:
    """Row-by-row enumeration over E x E, independent of the incidence counters."""
    x, y = E.component_arrays()
    w = E.weights()
    total = 0
    for r in range(x.shape[0]):
        first = spec.dot(x[r][None, :], x) == a
        if variant == "as_written":
            second = spec.dot(y[r][None, :], x) == b
        else:
            second = spec.dot(y[r][None, :], y) == b
        total += int(w[r]) * int(w[first & second].sum())
    return total


def dot_linepairs(E: PointSet, a: int, b: int) -> Tuple[HyperplanePairSet, Dict[str, np.ndarray]]:
    """
    The multiset {((u.X = a), (v.Y = b)) : (u, v) in E}.

    Returns the proper flat pairs (both normals nonzero) as a HyperplanePairSet, and the
    degenerate rows (a zero normal) as raw normal/offset arrays with their weights.
    """
    spec = E.spec
    proper, proper_weights = [], []
    u_rows, v_rows, degenerate_weights = [], [], []
    for ((u, v), m) in E.items():
        if any(u) and any(v):
            proper.append(HyperplanePair(Hyperplane.canonical(spec, u, a), Hyperplane.canonical(spec, v, b)))
            proper_weights.append(m)
        else:
            u_rows.append(u)
            v_rows.append(v)
            degenerate_weights.append(m)
    degenerate = {
        "normals": (np.array(u_rows, dtype=np.int64).reshape(-1, 2), np.array(v_rows, dtype=np.int64).reshape(-1, 2)),
        "offsets": (np.full(len(u_rows), a, dtype=np.int64), np.full(len(v_rows), b, dtype=np.int64)),
        "weights": np.array(degenerate_weights, dtype=np.int64),
    }
    return HyperplanePairSet(spec, (2, 2), proper, proper_weights), degenerate


def dot_product_pair_count(E: PointSet, a: int, b: int, variant: str = DEFAULT_VARIANT) -> DotProductReport:
    """
    Count ordered pairs ((x, y), (z, t)) of E x E with x.z = a and y.z = b (as_written) or
    y.t = b (corrected).

    The corrected count is also obtained as I(E, L) for the line-pair multiset built from E,
    and the two must agree.

    Example:
        q=3, E = F_3^2 x F_3^2, a = b = 1: as_written 648, corrected 576.
    """
    if variant not in PREDICATE_VARIANTS:
        raise IncidenceError(f"unknown predicate variant {variant!r}")
    _require_dims(E, (2, 2), "dot_product_pair_count")
    spec = E.spec
    q = spec.q
    a = _check_target(spec, a, "a")
    b = _check_target(spec, b, "b")
    n = E.total

    direct = _direct_pair_count(spec, E, a, b, variant)
    reduction = None
    multiset_bound: Dict[str, Any] = {}
    if variant == "corrected":
        L, degenerate = dot_linepairs(E, a, b)
        proper_count = count_incidences(E, L, "indexed").count
        x, y = E.component_arrays()
        degenerate_count = count_relation(spec, [x, y], E.weights(), degenerate["normals"],
                                          degenerate["offsets"], degenerate["weights"])
        reduction = proper_count + degenerate_count
        if reduction != direct:
            logger.error("dot-product reduction %d disagrees with enumeration %d", reduction, direct)
        main = Fraction(n * L.total, q * q)
        bound = q ** 1.5 * math.sqrt(E.sum_sq_multiplicity) * math.sqrt(L.sum_sq_multiplicity)
        discrepancy = float(abs(proper_count - main))
        multiset_bound = {
            "proper_incidences": proper_count,
            "proper_linepairs": L.total,
            "multiset_main_term": float(main),
            "multiset_bound": bound,
            "multiset_ratio": _ratio(discrepancy, bound),
        }

    large = _ratio(direct, Fraction(n * n, q * q)) if n >= q ** 3.5 else None
    return DotProductReport(
        a=a, b=b, count=direct, main_term=Fraction(n * n, q * q), bound=n * n / q ** 2 + q ** 1.5 * n,
        predicate_variant=variant, direct_count=direct, reduction_count=reduction, size=n,
        large_set_ratio=large, multiset_bound=multiset_bound,
    )


# ----- single dot products ----------------------------------------------------------


@dataclass(frozen=True)
class DotCountReport:
    """
    Fields:
    - target (int): a for x.y = a, t for the split count.
    - count (int): Ordered pairs of E x E.
    - bound (float): |E|^2/q + q^{e}|E| with the exponent of the statement used.
    - d (int): Dimension of E.
    - size (int): |E|.
    - decomposed (int, optional): Sum over a + b = t of the split counts.
    - splits (dict): a -> pairs with x1y1 + x2y2 = a and x3y3 + x4y4 = t - a.
    """
    target: int
    count: int
    bound: float
    d: int
    size: int
    decomposed: Optional[int] = None
    splits: Dict[int, int] = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return _ratio(self.count, self.bound)

    @property
    def agree(self) -> bool:
        return self.decomposed is None or self.decomposed == self.count

    def as_dict(self) -> Dict[str, Any]:
        return {**asdict(self), "ratio": self.ratio, "agree": self.agree}

    def to_bound_report(self, q: int, theorem_id: str) -> BoundReport:
        main = Fraction(self.size * self.size, q)
        return BoundReport(theorem_id, self.count, main, self.bound, float(abs(self.count - main)), self.ratio,
                           True, {"q": q, "d": self.d, "target": self.target, "E": self.size},
                           hard=self.decomposed is not None, passed=self.agree,
                           extras={"decomposed": self.decomposed})


def _dot_count(spec: FieldSpec, E: PointSet, target: int, workers: int = 1) -> int:
    x = E.array()
    w = E.weights()
    return count_relation(spec, [x], w, [x], [np.full(x.shape[0], target, dtype=np.int64)], w, workers)


def dot_product_single(E: PointSet, a: int, workers: int = 1) -> DotCountReport:
    """
    #{(x, y) in E x E : x.y = a} against |E|^2/q + q^{(d-1)/2}|E|.

    Raises:
        GeometryError: If a = 0 or E is not a subset of F_q^d with 2 <= d <= 4.
    """
    if len(E.dims) != 1 or E.dims[0] < 2:
        raise GeometryError(f"dot_product_single needs a point set of F_q^d, d >= 2, got {E.dims}")
    spec = E.spec
    a = _check_target(spec, a, "a")
    if a == 0:
        raise GeometryError("dot_product_single needs a nonzero target")
    d = E.dims[0]
    n = E.total
    count = _dot_count(spec, E, a, workers)
    return DotCountReport(target=a, count=count, bound=n * n / spec.q + spec.q ** ((d - 1) / 2) * n, d=d, size=n)


def dot_product_4d(E: PointSet, t: int, workers: int = 1) -> DotCountReport:
    """
    #{(x, y) in E x E : x.y = t} in F_q^4, also assembled from the split equations
    x1y1 + x2y2 = a, x3y3 + x4y4 = t - a over every a.
    """
    _require_dims(E, (4,), "dot_product_4d")
    spec = E.spec
    q = spec.q
    t = _check_target(spec, t, "t")
    x = E.array()
    w = E.weights()
    n = E.total
    direct = _dot_count(spec, E, t, workers)
    head, tail = x[:, :2], x[:, 2:]
    splits = {}
    for a in range(q):
        b = spec.sub(t, a)
        splits[a] = count_relation(spec, [head, tail], w, [head, tail],
                                   [np.full(x.shape[0], a, dtype=np.int64), np.full(x.shape[0], b, dtype=np.int64)],
                                   w, workers)
    decomposed = sum(splits.values())
    if decomposed != direct:
        logger.error("4d split total %d disagrees with direct count %d at t=%d", decomposed, direct, t)
    return DotCountReport(target=t, count=direct, bound=n * n / q + math.sqrt(q) * n, d=4, size=n,
                          decomposed=decomposed, splits=splits)


# ----- element-wise sum-product -----------------------------------------------------


@dataclass(frozen=True)
class SumProductReport:
    """
    Fields:
    - size (int): |A|.
    - sumset (int): |A + A|.
    - productset (int): |A (x) A|, element-wise products.
    - min_side / max_side (int)
    - hypothesis_ok (bool): min_side <= q^{7/2} |A|^{-2}.
    - conclusion_ratio (float): max_side / (q^{-3/8} |A|).
    - incidences (int): I(P, L) for P = (A+A) x (A (x) A) and the |A|^2 line-pairs.
    - lower_bound_ok (bool): |A|^3 <= I(P, L).
    - cartesian_ratio (float): I / (m sqrt(M)|L|/q + q^{3/4} sqrt(m M |L|)), m <= M the two sides.
    """
    size: int
    sumset: int
    productset: int
    min_side: int
    max_side: int
    hypothesis_ok: bool
    conclusion_ratio: float
    incidences: int
    lower_bound_ok: bool
    cartesian_ratio: float

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_bound_report(self, q: int) -> BoundReport:
        scale = self.size / q ** 0.375
        return BoundReport("sum_product", self.max_side, Fraction(0), scale, float(self.max_side),
                           self.conclusion_ratio, self.hypothesis_ok,
                           {"q": q, "A": self.size, "sumset": self.sumset, "productset": self.productset},
                           hard=True, passed=self.lower_bound_ok,
                           extras={"incidences": self.incidences, "cartesian_ratio": self.cartesian_ratio})


def _support_pairs(A: PointSet) -> List[Tuple[int, int]]:
    return [a for (a,) in A.support]


def sumset(spec: FieldSpec, A: PointSet) -> PointSet:
    pts = np.array(_support_pairs(A), dtype=np.int64)
    sums = spec.add(pts[:, None, :], pts[None, :, :]).reshape(-1, 2)
    return PointSet(spec, (2,), sorted(set(map(tuple, sums.tolist()))))


def productset(spec: FieldSpec, A: PointSet) -> PointSet:
    pts = np.array(_support_pairs(A), dtype=np.int64)
    products = spec.mul(pts[:, None, :], pts[None, :, :]).reshape(-1, 2)
    return PointSet(spec, (2,), sorted(set(map(tuple, products.tolist()))))


def sum_product_linepairs(spec: FieldSpec, A: PointSet) -> LinePairSet:
    """(Y = alpha1 (X - beta1), Y = alpha2 (X - beta2)) for alpha, beta in A, as a multiset."""
    pts = _support_pairs(A)
    elements = [
        LinePair(Line.nonvertical(alpha[0], spec.neg(spec.mul(alpha[0], beta[0]))),
                 Line.nonvertical(alpha[1], spec.neg(spec.mul(alpha[1], beta[1]))))
        for alpha in pts for beta in pts
    ]
    return LinePairSet(spec, elements)


def sum_product(A: PointSet) -> SumProductReport:
    """
    Sizes of A + A and A (x) A, with the incidence instance behind the estimate.

    Each line-pair (alpha, beta) passes through ((c1 + beta1, alpha1 c1), (c2 + beta2, alpha2 c2))
    for every c in A, so |A|^3 <= I(P, L) holds exactly.

    Raises:
        GeometryError: If A is empty or not a subset of F_q^2.
    """
    _require_dims(A, (2,), "sum_product")
    if A.support_size == 0:
        raise GeometryError("sum_product needs a nonempty set")
    spec = A.spec
    q = spec.q
    n = A.support_size
    S, T = sumset(spec, A), productset(spec, A)
    P = cartesian(spec, S, T)
    L = sum_product_linepairs(spec, A)
    I = count_incidences(P, L, "indexed").count
    lo, hi = sorted((S.total, T.total))
    cart_bound = lo * math.sqrt(hi) * L.total / q + q ** 0.75 * math.sqrt(lo * hi * L.total)
    lower_ok = n ** 3 <= I
    if not lower_ok:
        logger.error("sum-product lower bound failed: |A|^3=%d > I=%d", n ** 3, I)
    return SumProductReport(
        size=n, sumset=S.total, productset=T.total, min_side=lo, max_side=hi,
        hypothesis_ok=lo * n * n <= q ** 3.5,
        conclusion_ratio=hi / (q ** -0.375 * n),
        incidences=I, lower_bound_ok=lower_ok, cartesian_ratio=_ratio(I, cart_bound),
    )


# ----- vector-valued quadratic map --------------------------------------------------


@dataclass(frozen=True)
class VectorValuedReport:
    """
    Fields:
    - image_size (int): |F(A, B)| for F(x, y) = (x1^2 - x1 y1, x2^2 - x2 y2).
    - energy (int): #{(a, b, a', b') : F(a, b) = F(a', b')}.
    - ratio (float): |F(A, B)| / (q^{-3/8} |A||B|).
    - chain_ok (bool): (|A||B|)^2 <= |F(A, B)| * energy.
    - incidences (int): I(B x B, L) over the filtered line-pairs.
    - energy_claim_ok (bool): energy <= 2 I, reported as found.
    - hypothesis_ok (bool): |A|^2 |B| <= q^{7/2}.
    - filter_collapsed (bool): Characteristic 2, where a = -a and the sign filter loses one case.
    """
    size_a: int
    size_b: int
    image_size: int
    energy: int
    ratio: float
    chain_ok: bool
    incidences: int
    energy_claim_ok: bool
    hypothesis_ok: bool
    filter_collapsed: bool

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_bound_report(self, q: int) -> BoundReport:
        scale = self.size_a * self.size_b / q ** 0.375
        return BoundReport("vector_valued", self.image_size, Fraction(0), scale, float(self.image_size),
                           self.ratio, self.hypothesis_ok, {"q": q, "A": self.size_a, "B": self.size_b},
                           hard=True, passed=self.chain_ok,
                           extras={"energy": self.energy, "incidences": self.incidences,
                                   "energy_claim_ok": self.energy_claim_ok,
                                   "filter_collapsed": self.filter_collapsed})


def quadratic_map(spec: FieldSpec, x, y):
    """F(x, y) = (x1^2 - x1 y1, x2^2 - x2 y2), elementwise on arrays."""
    return spec.sub(spec.mul(x, x), spec.mul(x, y))


def vector_valued_linepairs(spec: FieldSpec, A: PointSet) -> Dict[str, np.ndarray]:
    """
    Raw normal form of l_{a,a'}: -a_i X + a'_i Y = a'_i^2 - a_i^2, kept when a1 != +-a'1 or a2 != +-a'2.

    Normals are not canonicalized; a component with a_i = a'_i = 0 holds everywhere.
    """
    pts = np.array(_support_pairs(A), dtype=np.int64)
    w = A.weights()
    n = pts.shape[0]
    left = np.repeat(pts, n, axis=0)
    right = np.tile(pts, (n, 1))
    weights = np.repeat(w, n) * np.tile(w, n)
    plus = left == right
    minus = left == spec.neg(right)
    same_up_to_sign = plus | minus
    keep = ~(same_up_to_sign[:, 0] & same_up_to_sign[:, 1])
    left, right, weights = left[keep], right[keep], weights[keep]
    normals = tuple(np.stack([spec.neg(left[:, i]), right[:, i]], axis=1) for i in range(2))
    offsets = tuple(spec.sub(spec.mul(right[:, i], right[:, i]), spec.mul(left[:, i], left[:, i])) for i in range(2))
    return {"normals": normals, "offsets": offsets, "weights": weights}


def vector_valued(A: PointSet, B: PointSet, workers: int = 1) -> VectorValuedReport:
    """
    Image size and energy of F on A x B, with the Cauchy-Schwarz chain and the energy-vs-incidence claim.

    Raises:
        GeometryError: If A or B is empty or not a subset of F_q^2.
    """
    _require_dims(A, (2,), "vector_valued")
    _require_dims(B, (2,), "vector_valued")
    if A.support_size == 0 or B.support_size == 0:
        raise GeometryError("vector_valued needs nonempty sets")
    spec = A.spec
    q = spec.q
    a = np.array(_support_pairs(A), dtype=np.int64)
    b = np.array(_support_pairs(B), dtype=np.int64)
    values = quadratic_map(spec, a[:, None, :], b[None, :, :]).reshape(-1, 2)
    weights = np.outer(A.weights(), B.weights()).reshape(-1)
    classes: Counter = Counter()
    for value, m in zip(map(tuple, values.tolist()), weights.tolist()):
        classes[value] += m
    image = len(classes)
    energy = sum(c * c for c in classes.values())
    nA, nB = A.total, B.total

    P = cartesian(spec, B, B)
    flats = vector_valued_linepairs(spec, A)
    first, second = P.component_arrays()
    I = count_relation(spec, [first, second], P.weights(), flats["normals"], flats["offsets"], flats["weights"],
                       workers)
    chain_ok = (nA * nB) ** 2 <= image * energy
    if not chain_ok:
        logger.error("vector-valued chain failed: (|A||B|)^2=%d > |F|*E=%d", (nA * nB) ** 2, image * energy)
    return VectorValuedReport(
        size_a=nA, size_b=nB, image_size=image, energy=energy,
        ratio=image / (q ** -0.375 * nA * nB), chain_ok=chain_ok, incidences=I,
        energy_claim_ok=energy <= 2 * I, hypothesis_ok=nA * nA * nB <= q ** 3.5,
        filter_collapsed=spec.p == 2,
    )
