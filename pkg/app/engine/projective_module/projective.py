"""
# Projective module: PF_q^d points, canonical representatives, orthogonality and the
affine -> projective embeddings.

Canonical form: the first (lowest-index) nonzero coordinate equals 1.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np

from app.engine.errors import GeometryError, SizeCapError
from app.engine.gf_module import FieldSpec

MAX_PROJ_POINTS = 10 ** 7


@dataclass(frozen=True, order=True)
class ProjPoint:
    """
    A point of PF_q^d stored by its canonical homogeneous coordinates.

    Fields:
    - coords (Tuple[int, ...]): d+1 encodings, first nonzero coordinate equal to 1.
    """
    coords: Tuple[int, ...]

    @property
    def d(self) -> int:
        return len(self.coords) - 1


def proj_count(q: int, d: int) -> int:
    """Number of points of PF_q^d, (q^{d+1}-1)/(q-1)."""
    return (q ** (d + 1) - 1) // (q - 1)


def canonicalize(spec: FieldSpec, v: Sequence[int]) -> ProjPoint:
    """
    Scale a nonzero vector so its first nonzero coordinate is 1.

    Args:
        spec (FieldSpec): The field.
        v (Sequence[int]): Encoded coordinates.

    Returns:
        ProjPoint: The canonical representative of the class of v.

    Raises:
        GeometryError: If v is the zero vector.
    """
    coords = [int(c) for c in v]
    pivot = next((c for c in coords if c != 0), None)
    if pivot is None:
        raise GeometryError("the zero vector has no projective class")
    scale = spec.inv(pivot)
    return ProjPoint(tuple(spec.mul(c, scale) for c in coords))


def canonicalize_rows(spec: FieldSpec, rows: np.ndarray) -> np.ndarray:
    """Vectorized canonicalize over the rows of an (n, d+1) array; rows must be nonzero."""
    rows = np.asarray(rows, dtype=np.int64)
    nonzero = rows != 0
    if not nonzero.any(axis=1).all():
        raise GeometryError("the zero vector has no projective class")
    pivot_index = np.argmax(nonzero, axis=1)
    pivots = rows[np.arange(rows.shape[0]), pivot_index]
    return spec.mul(rows, spec.inv(pivots)[:, None])


def orthogonal(spec: FieldSpec, x: ProjPoint, y: ProjPoint) -> bool:
    """True iff sum_i x_i*y_i = 0 in GF(q); scalar-invariant, so well-defined on classes."""
    if x.d != y.d:
        raise GeometryError(f"dimension mismatch: PF^{x.d} vs PF^{y.d}")
    return int(spec.dot(np.array(x.coords), np.array(y.coords))) == 0


def proj_codes(q: int, rows: np.ndarray) -> np.ndarray:
    """Base-q integer code of each row; lexicographic order on rows equals numeric order on codes."""
    rows = np.asarray(rows, dtype=np.int64)
    codes = np.zeros(rows.shape[:-1], dtype=np.int64)
    for j in range(rows.shape[-1]):
        codes = codes * q + rows[..., j]
    return codes


@lru_cache(maxsize=64)
def _proj_point_array(spec: FieldSpec, d: int) -> np.ndarray:
    count = proj_count(spec.q, d)
    if count > MAX_PROJ_POINTS:
        raise SizeCapError(f"PF_{spec.q}^{d} has {count} points, above the cap {MAX_PROJ_POINTS}")
    blocks = []
    # More leading zeros sorts first, so the pivot position runs from d down to 0.
    for pivot in range(d, -1, -1):
        tail_len = d - pivot
        tails = np.indices((spec.q,) * tail_len).reshape(tail_len, -1).T if tail_len else np.zeros((1, 0), np.int64)
        block = np.zeros((tails.shape[0], d + 1), dtype=np.int64)
        block[:, pivot] = 1
        block[:, pivot + 1:] = tails
        blocks.append(block)
    points = np.vstack(blocks)
    points.setflags(write=False)
    return points


def proj_point_array(spec: FieldSpec, d: int) -> np.ndarray:
    """All canonical points of PF_q^d as an (N, d+1) array, lexicographically ordered."""
    if d < 1:
        raise GeometryError(f"projective dimension must be >= 1, got {d}")
    return _proj_point_array(spec, d)


def enumerate_proj_points(spec: FieldSpec, d: int) -> list:
    """
    Every point of PF_q^d exactly once, lexicographic on canonical coordinates.

    Raises:
        SizeCapError: If (q^{d+1}-1)/(q-1) exceeds 10^7.
    """
    return [ProjPoint(tuple(int(c) for c in row)) for row in proj_point_array(spec, d)]


def proj_index(spec: FieldSpec, d: int, rows: np.ndarray) -> np.ndarray:
    """Positions of canonical rows inside the enumeration order of PF_q^d."""
    table = proj_codes(spec.q, proj_point_array(spec, d))
    codes = proj_codes(spec.q, rows)
    index = np.searchsorted(table, codes)
    if np.any(index >= table.size) or np.any(table[np.minimum(index, table.size - 1)] != codes):
        raise GeometryError("rows are not canonical projective points")
    return index


def embed_affine(spec: FieldSpec, point: Sequence[int]) -> ProjPoint:
    """(x_1, ..., x_d) -> class of (x_1, ..., x_d, 1)."""
    return canonicalize(spec, tuple(point) + (1,))


def embed_hyperplane(spec: FieldSpec, normal: Sequence[int], offset: int) -> ProjPoint:
    """
    Hyperplane sum a_i x_i = c -> class of (a_1, ..., a_d, -c).

    Raises:
        GeometryError: If the normal vector is all zero.
    """
    if not any(int(a) for a in normal):
        raise GeometryError("hyperplane normal vector is zero")
    return canonicalize(spec, tuple(normal) + (spec.neg(int(offset)),))


def embed_line(spec: FieldSpec, line) -> ProjPoint:
    """Embed a planar line given in normal form (a, b, c) for aX + bY = c, or as a geometry Line."""
    if hasattr(line, "normal_form"):
        a, b, c = line.normal_form(spec)
    else:
        a, b, c = line
    return embed_hyperplane(spec, (a, b), c)
