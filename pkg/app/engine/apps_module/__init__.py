"""
Dot-product counts, the element-wise sum-product experiment and the quadratic vector-valued map.
"""

from .apps import (
    DEFAULT_VARIANT,
    DotCountReport,
    DotProductReport,
    PREDICATE_VARIANTS,
    SumProductReport,
    VectorValuedReport,
    dot_linepairs,
    dot_product_4d,
    dot_product_pair_count,
    dot_product_single,
    productset,
    quadratic_map,
    sum_product,
    sum_product_linepairs,
    sumset,
    vector_valued,
    vector_valued_linepairs,
)

__all__ = [
    'DEFAULT_VARIANT',
    'DotCountReport',
    'DotProductReport',
    'PREDICATE_VARIANTS',
    'SumProductReport',
    'VectorValuedReport',
    'dot_linepairs',
    'dot_product_4d',
    'dot_product_pair_count',
    'dot_product_single',
    'productset',
    'quadratic_map',
    'sum_product',
    'sum_product_linepairs',
    'sumset',
    'vector_valued',
    'vector_valued_linepairs',
]
