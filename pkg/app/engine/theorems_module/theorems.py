"""
# Theorems module: one verifier per incidence bound.

Each verifier computes the exact left-hand side by brute force, evaluates the stated
right-hand side and returns a BoundReport. Statements with unspecified implied constants
are reported as ratios; only unconditional facts (the mixing lemma with a computed second
eigenvalue, counter agreement, Cauchy-Schwarz chains) set `hard=True`.
"""

import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Optional, Tuple

import numpy as np

from app.engine.errors import GeometryError, IncidenceError
from app.engine.gf_module import FieldSpec
from app.engine.geometry_module import (
    Hyperplane, HyperplanePair, HyperplanePairSet, IncidenceSet, LinePairSet, PointSet, cartesian,
)
from app.engine.counting_module import (
    EnergyQuery, count_incidences, cs_chain, degree_profile, phi_solutions,
)
from app.engine.spectral_module import (
    DEFAULT_TOL, SpectralReport, build_graph, embed_flat_rows, embed_point_rows, explicit_lambda_bound,
    second_eigenvalue, vertex_weights,
)

logger = logging.getLogger(__name__)

LAMBDA_MODES = ("paper", "computed")
_LAMBDA_ALIASES = {"paper": "paper", "paper_q32": "paper", "computed": "computed", "computed_lambda2": "computed"}
DEFAULT_THRESHOLD_EXPONENT = 3.5
PROOF_THRESHOLD_EXPONENT = 2.0


@dataclass(frozen=True)
class BoundReport:
    """
    Both sides of one bound on one instance.

    Fields:
    - theorem_id (str): Verifier name.
    - lhs (int): Exact incidence (or count) value.
    - main_term (Fraction): Expected value; 0 for one-sided bounds.
    - bound_term (float): Error term, or the whole right-hand side for one-sided bounds.
    - discrepancy (float): |lhs - main_term|.
    - ratio (float): discrepancy / bound_term, 0 when both vanish.
    - hypothesis_ok (bool): Whether the statement's hypotheses hold on this instance.
    - params (dict): Echo of the instance parameters.
    - hard (bool): True when `passed` is an unconditional check whose failure fails a run.
    - passed (bool): Outcome of the hard checks; True for report-only reports.
    - extras (dict): Secondary quantities (chain sides, alternative thresholds).
    """
    theorem_id: str
    lhs: int
    main_term: Fraction
    bound_term: float
    discrepancy: float
    ratio: float
    hypothesis_ok: bool = True
    params: Dict[str, Any] = field(default_factory=dict)
    hard: bool = False
    passed: bool = True
    extras: Dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["main_term"] = float(self.main_term)
        return out


@dataclass(frozen=True)
class SdzParams:
    """Constants C and C' of the large-incidence statement, both > 0."""
    C: float = 1.0
    C_prime: float = 1.0

    def __post_init__(self):
        if not (self.C > 0 and self.C_prime > 0):
            raise IncidenceError(f"SdZ constants must be positive, got C={self.C}, C'={self.C_prime}")


def _ratio(numerator: float, denominator: float) -> float:
    if denominator == 0:
        return 0.0 if numerator == 0 else math.inf
    return float(numerator) / float(denominator)


def _incidences(P: PointSet, L: IncidenceSet, cross_check: bool, workers: int = 1) -> Tuple[int, bool]:
    """Indexed count, plus agreement with the naive counter when cross_check is set."""
    indexed = count_incidences(P, L, "indexed", workers).count
    if not cross_check:
        return indexed, True
    naive = count_incidences(P, L, "naive", workers).count
    if naive != indexed:
        logger.error("counter disagreement: indexed=%d naive=%d", indexed, naive)
    return indexed, naive == indexed


def _weight_norm(collection: IncidenceSet) -> float:
    """sqrt(sum m(x)^2); equals sqrt(|X|) for sets."""
    return math.sqrt(collection.sum_sq_multiplicity)


@lru_cache(maxsize=16)
def graph_spectrum(spec: FieldSpec, d1: int, d2: int, tol: float = DEFAULT_TOL):
    """Cached (graph, SpectralReport) for the product polarity graph."""
    graph = build_graph(spec, d1, d2)
    return graph, second_eigenvalue(graph, tol)


# ----- Cauchy-Schwarz bound ---------------------------------------------------------


def verify_cs(P: PointSet, L: IncidenceSet, cross_check: bool = True) -> Tuple[BoundReport, BoundReport]:
    """
    Both Cauchy-Schwarz estimates as ratios.

    part 1: I / (q^{1/2} |P|^{1/2} |L| + |P|)
    part 2: I / (|P| |L|^{1/2} + |L|)

    The inequalities chained in the argument are evaluated exactly and reported in extras;
    the ones that hold unconditionally decide `passed`.
    """
    q = P.spec.q
    I, agree = _incidences(P, L, cross_check)
    chain = cs_chain(P, L, degree_profile(P, L))
    nP, nL = P.total, L.total
    params = {"q": q, "d1": P.dims[0], "d2": P.dims[1], "P": nP, "L": nL}
    passed = agree and chain.hard_ok and chain.incidences == I
    bound1 = math.sqrt(q) * math.sqrt(nP) * nL + nP
    bound2 = nP * math.sqrt(nL) + nL
    extras = chain.as_dict()
    part1 = BoundReport("cs1", I, Fraction(0), bound1, float(I), _ratio(I, bound1), True, params,
                        hard=True, passed=passed, extras=extras)
    part2 = BoundReport("cs2", I, Fraction(0), bound2, float(I), _ratio(I, bound2), True, params,
                        hard=True, passed=passed, extras=extras)
    return part1, part2


# ----- spectral incidence bounds ----------------------------------------------------


def _normalize_lambda_mode(mode: str) -> str:
    try:
        return _LAMBDA_ALIASES[mode]
    except KeyError:
        raise IncidenceError(f"unknown lambda mode {mode!r}") from None


def _embedded_incidences(graph, P: PointSet, L: IncidenceSet) -> Tuple[np.ndarray, np.ndarray, int]:
    first, second = P.component_arrays()
    f = vertex_weights(graph, embed_point_rows(graph, first, second), P.weights())
    flats = L.flat_arrays()
    h = vertex_weights(graph, embed_flat_rows(graph, flats.normals, flats.offsets), L.weights())
    return f, h, int(f @ (graph.adjacency @ h))


def _spectral_report(theorem_id: str, P: PointSet, L: IncidenceSet, lambda_mode: str, exponent: float,
                     cross_check: bool, tol: float, spectrum: Optional[Tuple[Any, SpectralReport]]) -> BoundReport:
    spec = P.spec
    q = spec.q
    d1, d2 = P.dims
    mode = _normalize_lambda_mode(lambda_mode)
    I, agree = _incidences(P, L, cross_check)
    nP, nL = P.total, L.total
    multiset = P.is_multiset or L.is_multiset
    scale = _weight_norm(P) * _weight_norm(L)
    params = {"q": q, "d1": d1, "d2": d2, "P": nP, "L": nL, "lambda_mode": mode, "multiset": multiset}
    explicit = explicit_lambda_bound(q, d1, d2)

    if mode == "paper":
        main = Fraction(nP * nL, q * q)
        bound = q ** exponent * scale
        discrepancy = float(abs(I - main))
        return BoundReport(theorem_id, I, main, bound, discrepancy, _ratio(discrepancy, bound), True, params,
                           hard=cross_check, passed=agree,
                           extras={"explicit_lambda_bound": explicit,
                                   "explicit_ratio": _ratio(discrepancy, explicit * scale)})

    graph, spectral = spectrum or graph_spectrum(spec, d1, d2, tol)
    f, h, embedded = _embedded_incidences(graph, P, L)
    main = Fraction(graph.k, graph.n) * nP * nL
    bound = spectral.lambda2 * scale
    discrepancy = float(abs(I - main))
    mixing_ok = discrepancy <= bound * (1 + 1e-9) + 1e-9
    passed = agree and mixing_ok and embedded == I
    if not passed:
        logger.error("%s violation: I=%d embedded=%d discrepancy=%.6f bound=%.6f",
                     theorem_id, I, embedded, discrepancy, bound)
    params["lambda2"] = spectral.lambda2
    return BoundReport(theorem_id, I, main, bound, discrepancy, _ratio(discrepancy, bound), True, params,
                       hard=True, passed=passed,
                       extras={"embedded_incidences": embedded, "explicit_lambda_bound": explicit,
                               "lambda_method": spectral.method})


def verify_vinh(P: PointSet, L: IncidenceSet, lambda_mode: str = "paper", cross_check: bool = True,
                tol: float = DEFAULT_TOL, spectrum=None) -> BoundReport:
    """
    |I - main| against the spectral error term in F_q^2 x F_q^2.

    Args:
        P (PointSet): Point-pairs, possibly a multiset.
        L (LinePairSet | HyperplanePairSet): Line-pairs, possibly a multiset.
        lambda_mode (str): paper uses main |P||L|/q^2 and q^{3/2}; computed uses (k/n)|P||L| and the
            measured second eigenvalue, a bound that must always hold.
        cross_check (bool): Also run the naive counter.
        tol (float): Eigensolver tolerance for computed mode.
        spectrum (tuple, optional): Precomputed (graph, SpectralReport).

    Returns:
        BoundReport: Multisets replace sqrt(|P||L|) by sqrt(sum m(p)^2) * sqrt(sum m(l)^2).
    """
    if tuple(P.dims) != (2, 2):
        raise GeometryError("verify_vinh works in F_q^2 x F_q^2")
    return _spectral_report("vinh", P, L, lambda_mode, 1.5, cross_check, tol, spectrum)


def verify_hyperplane(P: PointSet, H: IncidenceSet, lambda_mode: str = "paper", cross_check: bool = True,
                      tol: float = DEFAULT_TOL, spectrum=None) -> BoundReport:
    """
    |I - |P||H|/q^2| against q^{(d1+2d2-3)/2} sqrt(|P||H|), for 2 <= d1 <= d2.

    With d1 = d2 = 2 the numbers coincide with verify_vinh on the same inputs.
    """
    d1, d2 = P.dims
    if not 2 <= d1 <= d2 <= 4:
        raise GeometryError(f"verify_hyperplane needs 2 <= d1 <= d2 <= 4, got ({d1}, {d2})")
    return _spectral_report("hyperplane", P, H, lambda_mode, (d1 + 2 * d2 - 3) / 2, cross_check, tol, spectrum)


# ----- A x B bound and its energy reduction -----------------------------------------


@dataclass(frozen=True)
class EnergyReduction:
    """
    Fields:
    - Q (PointSet): ((x1, s'1, t'1), (x2, s'2, t'2)) in F_q^3 x F_q^3.
    - R (HyperplanePairSet): s_i X + t_i = x'_i Y + Z, i = 1, 2.
    - energy (int): I(Q, R).
    - direct_energy (int): #{(a, l, a', l') : s_i a_i + t_i = s'_i a'_i + t'_i}, counted by value classes.
    - bound (float): |A|^2 |L|^2 / q^2 + q^{3/2} |A| |L|, report-only.
    """
    Q: PointSet
    R: HyperplanePairSet
    energy: int
    direct_energy: int
    bound: float

    @property
    def agree(self) -> bool:
        return self.energy == self.direct_energy

    @property
    def bound_ok(self) -> bool:
        return self.energy <= self.bound * (1 + 1e-12)


def _require_nonvertical(L: LinePairSet) -> None:
    if not isinstance(L, LinePairSet):
        raise GeometryError("expected a line-pair set")
    if not L.nonvertical:
        raise GeometryError("every line-pair must have two non-vertical components")


def _phi(spec: FieldSpec, a: Tuple[int, int], ell) -> Tuple[int, int]:
    x1, x2 = a
    return (spec.add(spec.mul(ell.first.slope, x1), ell.first.intercept),
            spec.add(spec.mul(ell.second.slope, x2), ell.second.intercept))


def build_energy_reduction(A: PointSet, L: LinePairSet) -> EnergyReduction:
    """
    Turn the energy of (a, l) -> (s1 a1 + t1, s2 a2 + t2) into an incidence count in F_q^3 x F_q^3.

    Raises:
        GeometryError: If a line-pair has a vertical component or A is not a subset of F_q^2.
    """
    _require_nonvertical(L)
    if A.dims != (2,):
        raise GeometryError("A must be a point set of F_q^2")
    spec = A.spec
    q = spec.q
    points, point_weights, planes, plane_weights = [], [], [], []
    for (a,), ma in A.items():
        for ell, ml in L.items():
            points.append(((a[0], ell.first.slope, ell.first.intercept),
                           (a[1], ell.second.slope, ell.second.intercept)))
            point_weights.append(ma * ml)
            planes.append(HyperplanePair(
                Hyperplane.canonical(spec, (ell.first.slope, spec.neg(a[0]), spec.neg(1)), spec.neg(ell.first.intercept)),
                Hyperplane.canonical(spec, (ell.second.slope, spec.neg(a[1]), spec.neg(1)), spec.neg(ell.second.intercept)),
            ))
            plane_weights.append(ma * ml)
    Q = PointSet(spec, (3, 3), points, point_weights)
    R = HyperplanePairSet(spec, (3, 3), planes, plane_weights)
    energy = count_incidences(Q, R, "indexed").count

    classes: Counter = Counter()
    for (a,), ma in A.items():
        for ell, ml in L.items():
            classes[_phi(spec, a, ell)] += ma * ml
    direct = sum(c * c for c in classes.values())

    nA, nL = A.total, L.total
    bound = (nA * nL) ** 2 / q ** 2 + q ** 1.5 * nA * nL
    if energy != direct:
        logger.error("energy disagreement: incidence=%d direct=%d", energy, direct)
    return EnergyReduction(Q=Q, R=R, energy=energy, direct_energy=direct, bound=bound)


def verify_cartesian(A: PointSet, B: PointSet, L: LinePairSet,
                     threshold_exponent: float = DEFAULT_THRESHOLD_EXPONENT,
                     cross_check: bool = True) -> BoundReport:
    """
    I(A x B, L) against |A||B|^{1/2}|L|/q + q^{3/4} sqrt(|A||B||L|).

    Hard checks: the counters agree, the energy reduction matches its direct count, the
    lemma's solution count equals I, and I^2 <= |B| * energy.

    Raises:
        GeometryError: If |A| > |B| or some line-pair has a vertical component.
    """
    _require_nonvertical(L)
    if A.total > B.total:
        raise GeometryError(f"verify_cartesian needs |A| <= |B|, got {A.total} > {B.total}")
    spec = A.spec
    q = spec.q
    P = cartesian(spec, A, B)
    I, agree = _incidences(P, L, cross_check)
    nA, nB, nL = A.total, B.total, L.total

    reduction = build_energy_reduction(A, L)
    domain = [(a, ell) for (a,), ma in A.items() for ell, ml in L.items() for _ in range(ma * ml)]
    lemma = phi_solutions(EnergyQuery(
        domain=domain,
        phi=lambda item: _phi(spec, item[0], item[1]),
        target=[b for (b,) in B.support],
    ))
    # I <= |B|^{1/2} E^{1/2} needs B to be a set
    chain_ok = B.is_multiset or I * I <= nB * reduction.energy

    small = q ** 0.75 * math.sqrt(nA * nB * nL)
    bound = nA * math.sqrt(nB) * nL / q + small
    passed = agree and reduction.agree and chain_ok and (B.is_multiset or lemma.solutions == I)
    params = {"q": q, "A": nA, "B": nB, "L": nL, "threshold_exponent": threshold_exponent}
    extras = {
        "energy": reduction.energy,
        "energy_direct": reduction.direct_energy,
        "energy_bound": reduction.bound,
        "energy_bound_ok": reduction.bound_ok,
        "lemma_solutions": lemma.solutions,
        "chain_ok": chain_ok,
        "second_clause_ratio": _ratio(I, small),
        "hypothesis_ok_statement": nA * nL <= q ** DEFAULT_THRESHOLD_EXPONENT,
        "hypothesis_ok_proof": nA * nL <= q ** PROOF_THRESHOLD_EXPONENT,
    }
    return BoundReport("cartesian", I, Fraction(0), bound, float(I), _ratio(I, bound),
                       nA * nL <= q ** threshold_exponent, params, hard=True, passed=passed, extras=extras)


# ----- large-incidence statement ----------------------------------------------------


def verify_sdz(P: PointSet, L: IncidenceSet, params: Optional[SdzParams] = None,
               cross_check: bool = True) -> BoundReport:
    """
    I(P, L) against C n^2 sqrt(m/q) for m point-pairs and n line-pairs.

    hypothesis_ok is q^3 > n > q/C and n^4 >= C' m q^3; the ratio is reported either way.
    """
    params = params or SdzParams()
    q = P.spec.q
    I, agree = _incidences(P, L, cross_check)
    m, n = P.total, L.total
    n_range_ok = q ** 3 > n > q / params.C
    density_ok = n ** 4 >= params.C_prime * m * q ** 3
    bound = params.C * n * n * math.sqrt(m / q)
    return BoundReport("sdz", I, Fraction(0), bound, float(I), _ratio(I, bound), n_range_ok and density_ok,
                       {"q": q, "m": m, "n": n, "C": params.C, "C_prime": params.C_prime},
                       hard=cross_check, passed=agree,
                       extras={"n_range_ok": n_range_ok, "density_ok": density_ok})
