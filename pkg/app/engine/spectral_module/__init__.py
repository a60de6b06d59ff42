"""
The product polarity graph, its common-neighbour structure, second eigenvalue and mixing checks.
"""

from .spectral import (
    DEFAULT_TOL,
    DENSE_VERTEX_CAP,
    EntryMismatch,
    IncidenceGraph,
    MixingResult,
    NeighborCheck,
    SpectralReport,
    SquareDecomposition,
    asymptotic_lambda_scale,
    build_graph,
    closed_form_lambda2,
    common_neighbors,
    dump_graph,
    dumps_graph,
    embed_flat_rows,
    embed_point_rows,
    expected_common_neighbors,
    explicit_lambda_bound,
    measured_spectrum,
    mixing_check,
    mixing_check_l2,
    polarity_factor,
    second_eigenvalue,
    verify_neighbor_formula,
    verify_square_decomposition,
    vertex_weights,
)

__all__ = [
    'DEFAULT_TOL',
    'DENSE_VERTEX_CAP',
    'EntryMismatch',
    'IncidenceGraph',
    'MixingResult',
    'NeighborCheck',
    'SpectralReport',
    'SquareDecomposition',
    'asymptotic_lambda_scale',
    'build_graph',
    'closed_form_lambda2',
    'common_neighbors',
    'dump_graph',
    'dumps_graph',
    'embed_flat_rows',
    'embed_point_rows',
    'expected_common_neighbors',
    'explicit_lambda_bound',
    'measured_spectrum',
    'mixing_check',
    'mixing_check_l2',
    'polarity_factor',
    'second_eigenvalue',
    'verify_neighbor_formula',
    'verify_square_decomposition',
    'vertex_weights',
]
