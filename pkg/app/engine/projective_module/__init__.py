"""
Projective spaces PF_q^d: canonical points, orthogonality, embeddings.
"""

from .projective import (
    ProjPoint,
    canonicalize,
    canonicalize_rows,
    embed_affine,
    embed_hyperplane,
    embed_line,
    enumerate_proj_points,
    orthogonal,
    proj_codes,
    proj_count,
    proj_index,
    proj_point_array,
)

__all__ = [
    'ProjPoint',
    'canonicalize',
    'canonicalize_rows',
    'embed_affine',
    'embed_hyperplane',
    'embed_line',
    'enumerate_proj_points',
    'orthogonal',
    'proj_codes',
    'proj_count',
    'proj_index',
    'proj_point_array',
]
