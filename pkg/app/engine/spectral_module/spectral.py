"""
# Spectral module: the product polarity graph on PF_q^{d1} x PF_q^{d2}.

Vertex ([x1], [x2]) is adjacent to ([y1], [y2]) iff <x1, y1> = 0 and <x2, y2> = 0.
Absolute points (self-orthogonal) carry loops, which keeps the graph exactly regular.
The adjacency is the Kronecker product of the two factor polarity graphs, so vertex
(i1, i2) has index i1 * N2 + i2.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import scipy.sparse as sp

from app.engine.errors import ConvergenceError, GeometryError, IncidenceError, SizeCapError
from app.engine.gf_module import FieldSpec
from app.engine.projective_module import (
    ProjPoint, canonicalize_rows, proj_count, proj_index, proj_point_array,
)

logger = logging.getLogger(__name__)

MAX_VERTICES = 10 ** 5
DENSE_VERTEX_CAP = 5 * 10 ** 3
MAX_POWER_ITERATIONS = 10 ** 5
DEFAULT_TOL = 1e-8
_ROW_BLOCK = 512
_BLOCK_CELLS = 1 << 22


def _t(q: int, d: int) -> int:
    """(q^d - 1)/(q - 1): points of PF_q^{d-1}, or hyperplanes of F_q^d through a point."""
    return (q ** d - 1) // (q - 1)


@lru_cache(maxsize=32)
def _polarity_factor(spec: FieldSpec, d: int) -> sp.csr_matrix:
    points = proj_point_array(spec, d)
    n = points.shape[0]
    rows, cols = [], []
    for start in range(0, n, _ROW_BLOCK):
        block = points[start:start + _ROW_BLOCK]
        hits = spec.dot(block[:, None, :], points[None, :, :]) == 0
        r, c = np.nonzero(hits)
        rows.append(r + start)
        cols.append(c)
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    matrix = sp.csr_matrix((np.ones(r.size, dtype=np.int64), (r, c)), shape=(n, n))
    return matrix


def polarity_factor(spec: FieldSpec, d: int) -> sp.csr_matrix:
    """
    Orthogonality adjacency of PF_q^d, loops included.

    Each row has exactly (q^d-1)/(q-1) ones, the size of a hyperplane of PF_q^d.
    """
    if not 1 <= d <= 4:
        raise GeometryError(f"dimension {d} outside 1..4")
    return _polarity_factor(spec, d)


@dataclass(frozen=True, eq=False)
class IncidenceGraph:
    """
    Fields:
    - spec (FieldSpec): The field.
    - d1, d2 (int): Affine dimensions of the two factors.
    - adjacency (scipy.sparse.csr_matrix): Symmetric 0/1 matrix, loops on the diagonal.
    - k1, k2 (int): Factor degrees; the product degree is k = k1 * k2.
    - perturbed (bool): True once flip_entry has altered the adjacency.
    """
    spec: FieldSpec
    d1: int
    d2: int
    adjacency: sp.csr_matrix = field(repr=False)
    k1: int
    k2: int
    perturbed: bool = False

    @property
    def q(self) -> int:
        return self.spec.q

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def k(self) -> int:
        return self.k1 * self.k2

    @property
    def factor_sizes(self) -> Tuple[int, int]:
        return proj_count(self.q, self.d1), proj_count(self.q, self.d2)

    def vertex(self, index: int) -> Tuple[ProjPoint, ProjPoint]:
        _, n2 = self.factor_sizes
        i1, i2 = divmod(int(index), n2)
        first = proj_point_array(self.spec, self.d1)[i1]
        second = proj_point_array(self.spec, self.d2)[i2]
        return ProjPoint(tuple(int(c) for c in first)), ProjPoint(tuple(int(c) for c in second))

    @property
    def vertices(self) -> List[Tuple[ProjPoint, ProjPoint]]:
        return [self.vertex(i) for i in range(self.n)]

    def index_of(self, first: Sequence[int], second: Sequence[int]) -> int:
        """Vertex index of the classes of two nonzero vectors."""
        i1 = proj_index(self.spec, self.d1, canonicalize_rows(self.spec, np.array([first])))[0]
        i2 = proj_index(self.spec, self.d2, canonicalize_rows(self.spec, np.array([second])))[0]
        return int(i1) * self.factor_sizes[1] + int(i2)

    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1)).ravel()

    def is_regular(self) -> bool:
        return bool(np.all(self.degrees() == self.k))

    def is_symmetric(self) -> bool:
        return (self.adjacency != self.adjacency.T).nnz == 0

    def loops(self) -> int:
        return int(self.adjacency.diagonal().sum())

    @cached_property
    def square(self) -> sp.csr_matrix:
        return (self.adjacency @ self.adjacency).tocsr()

    def flip_entry(self, u: int, v: int) -> "IncidenceGraph":
        """
        A copy with the (u, v) and (v, u) entries toggled, for fault-injection runs.
        """
        matrix = self.adjacency.tolil(copy=True)
        value = 0 if matrix[u, v] else 1
        matrix[u, v] = value
        matrix[v, u] = value
        return replace(self, adjacency=matrix.tocsr(), perturbed=True)


def build_graph(spec: FieldSpec, d1: int = 2, d2: int = 2) -> IncidenceGraph:
    """
    Build the product polarity graph.

    Args:
        spec (FieldSpec): The field.
        d1 (int): Dimension of the first factor.
        d2 (int): Dimension of the second factor.

    Returns:
        IncidenceGraph: n = t(d1+1) * t(d2+1) vertices, k = t(d1) * t(d2), t(d) = (q^d-1)/(q-1).

    Raises:
        SizeCapError: If n exceeds 10^5.
    """
    n = proj_count(spec.q, d1) * proj_count(spec.q, d2)
    if n > MAX_VERTICES:
        raise SizeCapError(f"graph on {n} vertices exceeds the cap {MAX_VERTICES}")
    a1 = polarity_factor(spec, d1)
    a2 = polarity_factor(spec, d2)
    adjacency = sp.kron(a1, a2, format="csr")
    graph = IncidenceGraph(spec=spec, d1=d1, d2=d2, adjacency=adjacency, k1=_t(spec.q, d1), k2=_t(spec.q, d2))
    logger.debug("built G(q=%d, d1=%d, d2=%d): n=%d k=%d loops=%d", spec.q, d1, d2, n, graph.k, graph.loops())
    return graph


# ----- common neighbours ------------------------------------------------------------


def common_neighbors(g: IncidenceGraph, u: int, v: int) -> int:
    """Number of vertices adjacent to both u and v, i.e. the (u, v) entry of A^2."""
    row_u = g.adjacency.getrow(u)
    row_v = g.adjacency.getrow(v)
    return int(row_u.multiply(row_v).sum())


def expected_common_neighbors(q: int, d1: int, d2: int, same_first: bool, same_second: bool) -> int:
    """
    Closed-form common-neighbour count of the unperturbed product graph.

    Equal classes share a hyperplane, t(d) vertices; distinct classes share t(d-1).
    For d1 = d2 = 2 the values are (q+1)^2, q+1 and 1.
    """
    first = _t(q, d1) if same_first else _t(q, d1 - 1)
    second = _t(q, d2) if same_second else _t(q, d2 - 1)
    return first * second


def _factor_neighbor_matrix(q: int, d: int, size: int) -> np.ndarray:
    same, other = _t(q, d), _t(q, d - 1)
    return np.full((size, size), other, dtype=np.int64) + (same - other) * np.eye(size, dtype=np.int64)


@dataclass(frozen=True)
class EntryMismatch:
    u: int
    v: int
    got: int
    expected: Optional[int] = None


@dataclass(frozen=True)
class NeighborCheck:
    ok: bool
    pairs_checked: int
    first_mismatch: Optional[EntryMismatch] = None

    def __bool__(self) -> bool:
        return self.ok


def verify_neighbor_formula(g: IncidenceGraph) -> NeighborCheck:
    """
    Compare every entry of A^2 against the case formula.

    Returns:
        NeighborCheck: Truthy iff all n^2 entries match; carries the first mismatch otherwise.
    """
    n1, n2 = g.factor_sizes
    m1 = _factor_neighbor_matrix(g.q, g.d1, n1)
    m2 = _factor_neighbor_matrix(g.q, g.d2, n2)
    square = g.square
    block_rows = max(1, _BLOCK_CELLS // g.n)
    for start in range(0, g.n, block_rows):
        stop = min(g.n, start + block_rows)
        got = square[start:stop].toarray()
        rows = np.arange(start, stop)
        expected = (m1[rows // n2][:, :, None] * m2[rows % n2][:, None, :]).reshape(stop - start, g.n)
        bad = np.argwhere(got != expected)
        if bad.size:
            r, c = bad[0]
            mismatch = EntryMismatch(int(start + r), int(c), int(got[r, c]), int(expected[r, c]))
            logger.info("common-neighbour mismatch at %s", mismatch)
            return NeighborCheck(ok=False, pairs_checked=int((start + r) * g.n + c + 1), first_mismatch=mismatch)
    return NeighborCheck(ok=True, pairs_checked=g.n * g.n)


@dataclass(frozen=True)
class SquareDecomposition:
    """
    A^2 = J + ((q+1)^2 - 1) I + q E with E a 0/1 symmetric matrix of zero diagonal.

    Fields:
    - ok (bool): The decomposition holds and E is 2q(q+1)-regular.
    - e_degree (int, optional): Common row sum of E when it is regular.
    - first_offending (EntryMismatch, optional): First entry of A^2 for which E fails to be 0/1.
    - reason (str): Empty on success.
    """
    ok: bool
    e_degree: Optional[int] = None
    first_offending: Optional[EntryMismatch] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_square_decomposition(g: IncidenceGraph) -> SquareDecomposition:
    """
    Check the A^2 identity for d1 = d2 = 2 entry by entry.

    Raises:
        GeometryError: If the graph is not a (2, 2) product.
        SizeCapError: If n exceeds the dense cap.
    """
    if (g.d1, g.d2) != (2, 2):
        raise GeometryError("the square decomposition is stated for d1 = d2 = 2")
    if g.n > DENSE_VERTEX_CAP:
        raise SizeCapError(f"square decomposition needs n <= {DENSE_VERTEX_CAP}, got {g.n}")
    q = g.q
    diagonal_shift = (q + 1) ** 2 - 1
    square = g.square
    e_rows, e_cols = [], []
    for start in range(0, g.n, _ROW_BLOCK):
        stop = min(g.n, start + _ROW_BLOCK)
        block = square[start:stop].toarray() - 1
        block[np.arange(stop - start), np.arange(start, stop)] -= diagonal_shift
        bad = np.argwhere((block != 0) & (block != q))
        if bad.size:
            r, c = bad[0]
            u, v = int(start + r), int(c)
            return SquareDecomposition(
                ok=False, first_offending=EntryMismatch(u, v, int(square[u, v])),
                reason="A^2 - J - ((q+1)^2-1)I is not q times a 0/1 matrix",
            )
        r, c = np.nonzero(block == q)
        e_rows.append(r + start)
        e_cols.append(c)
    rows = np.concatenate(e_rows)
    cols = np.concatenate(e_cols)
    e = sp.csr_matrix((np.ones(rows.size, dtype=np.int64), (rows, cols)), shape=(g.n, g.n))
    if e.diagonal().any():
        u = int(np.flatnonzero(e.diagonal())[0])
        return SquareDecomposition(ok=False, first_offending=EntryMismatch(u, u, int(square[u, u]), (q + 1) ** 2),
                                   reason="E has a nonzero diagonal entry")
    if (e != e.T).nnz:
        return SquareDecomposition(ok=False, reason="E is not symmetric")
    row_sums = np.asarray(e.sum(axis=1)).ravel()
    target = 2 * q * (q + 1)
    if not np.all(row_sums == target):
        u = int(np.flatnonzero(row_sums != target)[0])
        return SquareDecomposition(ok=False, reason=f"E row {u} sums to {int(row_sums[u])}, expected {target}")
    return SquareDecomposition(ok=True, e_degree=target)


# ----- second eigenvalue ------------------------------------------------------------


def explicit_lambda_bound(q: int, d1: int, d2: int) -> float:
    """
    Bound on |lambda| read off the row sums of A^2 - (common-neighbour floor) J.

    A vertex shares its first component with t(d2+1) - 1 others, each entry exceeding the floor by
    q^{d1-1} t(d2-1); symmetrically for the second component. For d1 = d2 = 2 this is
    sqrt(2q^3 + 3q^2 + 2q).
    """
    k = _t(q, d1) * _t(q, d2)
    floor = _t(q, d1 - 1) * _t(q, d2 - 1)
    same_first = q ** (d1 - 1) * _t(q, d2 - 1) * (_t(q, d2 + 1) - 1)
    same_second = q ** (d2 - 1) * _t(q, d1 - 1) * (_t(q, d1 + 1) - 1)
    return math.sqrt(k - floor + same_first + same_second)


def asymptotic_lambda_scale(q: int, d1: int, d2: int) -> float:
    """q^{(d1 + 2 d2 - 3)/2}, the order of growth without its constant."""
    return q ** ((d1 + 2 * d2 - 3) / 2)


def closed_form_lambda2(q: int, d1: int, d2: int) -> float:
    """Second eigenvalue predicted by the factor spectra {t(d), +-sqrt(q^{d-1})}."""
    k1, k2 = _t(q, d1), _t(q, d2)
    return max(k1 * math.sqrt(q ** (d2 - 1)), k2 * math.sqrt(q ** (d1 - 1)))


@dataclass(frozen=True)
class SpectralReport:
    """
    Fields:
    - lambda2 (float): Largest |eigenvalue| of A on the complement of the all-ones vector.
    - method (str): dense or power-iteration.
    - residual (float): Relative residual of the returned eigenpair.
    - iterations (int): Power-iteration steps, 0 for the dense path.
    - bound (float): The explicit bound.
    - bound_ok (bool): lambda2 <= bound (up to rounding).
    - closed_form (float): Factor-spectrum prediction, report-only.
    - asymptotic_ratio (float): lambda2 / q^{(d1+2d2-3)/2}, report-only.
    """
    lambda2: float
    method: str
    residual: float
    iterations: int
    bound: float
    bound_ok: bool
    closed_form: float
    asymptotic_ratio: float

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _dense_lambda2(g: IncidenceGraph) -> Tuple[float, float]:
    a = g.adjacency.toarray().astype(np.float64)
    n = g.n
    centred = a - a.mean(axis=0, keepdims=True)
    centred = centred - centred.mean(axis=1, keepdims=True)
    values, vectors = np.linalg.eigh(centred)
    index = int(np.argmax(np.abs(values)))
    value, vector = values[index], vectors[:, index]
    residual = float(np.linalg.norm(centred @ vector - value * vector)) / max(abs(value), 1.0)
    return float(abs(value)), residual


def _power_lambda2(g: IncidenceGraph, tol: float, seed: int, max_iter: int) -> Tuple[float, float, int]:
    a = g.adjacency.astype(np.float64)
    rng = np.random.default_rng(seed)
    x = rng.normal(size=g.n)
    x -= x.mean()
    x /= np.linalg.norm(x)
    mu, residual = 0.0, math.inf
    for iteration in range(1, max_iter + 1):
        z = a @ x
        z -= z.mean()
        y = a @ z
        y -= y.mean()
        mu = float(x @ y)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0, 0.0, iteration
        residual = float(np.linalg.norm(y - mu * x)) / max(abs(mu), 1.0)
        if residual < tol:
            return math.sqrt(max(mu, 0.0)), residual, iteration
        x = y / norm
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps",
                           residual=residual, iterations=max_iter)


def second_eigenvalue(g: IncidenceGraph, tol: float = DEFAULT_TOL, method: str = "auto", seed: int = 0,
                      max_iter: int = MAX_POWER_ITERATIONS) -> SpectralReport:
    """
    Largest |eigenvalue| of A orthogonal to the all-ones vector.

    Args:
        g (IncidenceGraph): The graph.
        tol (float): Relative residual tolerance, > 0.
        method (str): auto, dense or power. auto picks dense when n <= 5000.
        seed (int): Start vector seed for power iteration.
        max_iter (int): Power-iteration cap.

    Returns:
        SpectralReport

    Raises:
        IncidenceError: If tol <= 0 or method is unknown.
        ConvergenceError: If power iteration hits the cap.
    """
    if not tol > 0:
        raise IncidenceError(f"eigen tolerance must be positive, got {tol}")
    if method == "auto":
        method = "dense" if g.n <= DENSE_VERTEX_CAP else "power"
    if method == "dense":
        if g.n > DENSE_VERTEX_CAP:
            raise SizeCapError(f"dense eigensolve needs n <= {DENSE_VERTEX_CAP}, got {g.n}")
        lambda2, residual = _dense_lambda2(g)
        iterations, label = 0, "dense"
    elif method == "power":
        # Power iteration on A^2 returns lambda^2.
        lambda2, residual, iterations = _power_lambda2(g, tol, seed, max_iter)
        label = "power-iteration"
    else:
        raise IncidenceError(f"unknown eigen method {method!r}")
    bound = explicit_lambda_bound(g.q, g.d1, g.d2)
    return SpectralReport(
        lambda2=lambda2,
        method=label,
        residual=residual,
        iterations=iterations,
        bound=bound,
        bound_ok=lambda2 <= bound * (1 + 1e-9),
        closed_form=closed_form_lambda2(g.q, g.d1, g.d2),
        asymptotic_ratio=lambda2 / asymptotic_lambda_scale(g.q, g.d1, g.d2),
    )


def measured_spectrum(g: IncidenceGraph, decimals: int = 6) -> Dict[float, int]:
    """Distinct eigenvalues of A (rounded) with multiplicities; dense path only."""
    if g.n > DENSE_VERTEX_CAP:
        raise SizeCapError(f"full spectrum needs n <= {DENSE_VERTEX_CAP}, got {g.n}")
    values = np.round(np.linalg.eigvalsh(g.adjacency.toarray().astype(np.float64)), decimals)
    distinct, counts = np.unique(values, return_counts=True)
    return {float(v) + 0.0: int(c) for v, c in zip(distinct[::-1], counts[::-1])}


# ----- mixing lemmas ----------------------------------------------------------------


@dataclass(frozen=True)
class MixingResult:
    """
    Fields:
    - edges (int): e(U, V) or <f, A g>, exact.
    - main_term (Fraction): (k/n)|U||V| or (k/n)(sum f)(sum g).
    - discrepancy (float): |edges - main_term|.
    - bound (float): lambda * sqrt(|U||V|) or lambda * ||f|| * ||g||.
    - ok (bool): discrepancy <= bound.
    """
    edges: int
    main_term: Fraction
    discrepancy: float
    bound: float
    ok: bool

    def as_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["main_term"] = float(self.main_term)
        return out


def _as_weights(g: IncidenceGraph, values, name: str) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    if values.shape != (g.n,):
        raise GeometryError(f"{name} must have one entry per vertex ({g.n}), got shape {values.shape}")
    if values.size and values.min() < 0:
        raise GeometryError(f"{name} must be non-negative")
    return values


def _indicator(g: IncidenceGraph, subset) -> np.ndarray:
    out = np.zeros(g.n, dtype=np.int64)
    index = np.fromiter((int(u) for u in subset), dtype=np.int64)
    if index.size and (index.min() < 0 or index.max() >= g.n):
        raise GeometryError("vertex index outside the graph")
    out[index] = 1
    return out


def _mixing(g: IncidenceGraph, f: np.ndarray, h: np.ndarray, lam: float, scale: float) -> MixingResult:
    edges = int(f @ (g.adjacency @ h))
    main = Fraction(g.k, g.n) * int(f.sum()) * int(h.sum())
    discrepancy = float(abs(edges - main))
    bound = float(lam) * scale
    return MixingResult(edges=edges, main_term=main, discrepancy=discrepancy, bound=bound,
                        ok=discrepancy <= bound * (1 + 1e-9) + 1e-9)


def mixing_check(g: IncidenceGraph, U, V, lam: float) -> MixingResult:
    """e(U, V) counted over ordered pairs; a loop at u in U and V counts once."""
    f = _indicator(g, U)
    h = _indicator(g, V)
    return _mixing(g, f, h, lam, math.sqrt(int(f.sum()) * int(h.sum())))


def mixing_check_l2(g: IncidenceGraph, f, g_fn, lam: float) -> MixingResult:
    """Weighted form with Euclidean norms ||f|| = sqrt(<f, f>)."""
    f = _as_weights(g, f, "f")
    h = _as_weights(g, g_fn, "g_fn")
    return _mixing(g, f, h, lam, math.sqrt(int(f @ f)) * math.sqrt(int(h @ h)))


# ----- affine embeddings ------------------------------------------------------------


def embed_point_rows(g: IncidenceGraph, first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Vertex indices of affine point-pairs, (x1, 1) and (x2, 1) per component."""
    ones = np.ones((first.shape[0], 1), dtype=np.int64)
    i1 = proj_index(g.spec, g.d1, canonicalize_rows(g.spec, np.hstack([first, ones])))
    i2 = proj_index(g.spec, g.d2, canonicalize_rows(g.spec, np.hstack([second, ones])))
    return i1 * g.factor_sizes[1] + i2


def embed_flat_rows(g: IncidenceGraph, normals: Sequence[np.ndarray], offsets: Sequence[np.ndarray]) -> np.ndarray:
    """Vertex indices of hyperplane-pairs, (a, -c) per component."""
    idx = []
    for d, a, c in zip((g.d1, g.d2), normals, offsets):
        rows = np.hstack([a, g.spec.neg(c)[:, None]])
        idx.append(proj_index(g.spec, d, canonicalize_rows(g.spec, rows)))
    return idx[0] * g.factor_sizes[1] + idx[1]


def vertex_weights(g: IncidenceGraph, indices: np.ndarray, multiplicities: np.ndarray) -> np.ndarray:
    out = np.zeros(g.n, dtype=np.int64)
    np.add.at(out, indices, multiplicities)
    return out


# ----- dump -------------------------------------------------------------------------


def dumps_graph(g: IncidenceGraph) -> str:
    """Adjacency list: `u v` once per edge with u <= v, loops as `u u`."""
    upper = sp.triu(g.adjacency, format="coo")
    order = np.lexsort((upper.col, upper.row))
    lines = [f"# ffincidence-graph v1 q={g.q} d1={g.d1} d2={g.d2}"]
    lines.extend(f"{int(u)} {int(v)}" for u, v in zip(upper.row[order], upper.col[order]))
    return "\n".join(lines) + "\n"


def dump_graph(g: IncidenceGraph, target: Union[str, TextIO]) -> None:
    text = dumps_graph(g)
    if hasattr(target, "write"):
        target.write(text)
        return
    with open(target, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
